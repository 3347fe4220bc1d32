use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use super::ast::*;
use super::expr::{CExpr, Lit};
use super::ModelError;
use crate::lexer::Position;
use crate::semantics::{StateValuation, Value};

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableKind {
    Int { low: i64, high: i64 },
    Bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariableInfo {
    pub name: String,
    pub module: String,
    pub kind: VariableKind,
    pub init: Value,
}

impl VariableInfo {
    pub fn admits(&self, value: Value) -> bool {
        match (self.kind, value) {
            (VariableKind::Int { low, high }, Value::Int(v)) => low <= v && v <= high,
            (VariableKind::Bool, Value::Bool(_)) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledUpdate {
    pub prob: f64,
    pub assignments: Vec<(usize, CExpr)>,
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledCommand {
    pub module: String,
    pub index: usize,
    pub action: Option<String>,
    pub guard: CExpr,
    pub updates: Vec<CompiledUpdate>,
    pub pos: Position,
}

impl CompiledCommand {
    pub fn describe(&self) -> String {
        describe(&self.module, self.index, self.action.as_deref(), self.pos)
    }
}

fn describe(module: &str, index: usize, action: Option<&str>, pos: Position) -> String {
    format!(
        "{module}#{index} [{}] at {pos}",
        action.unwrap_or_default()
    )
}

/// Commands on an action shared by several modules; one list of command
/// indices per participating module.
#[derive(Clone, Debug)]
pub(crate) struct SyncGroup {
    pub action: String,
    pub modules: Vec<Vec<usize>>,
}

/// A model with constants folded, formulas substituted, renamed modules
/// expanded and every expression type-checked and compiled.
#[derive(Clone, Debug)]
pub struct ElaboratedModel {
    pub(crate) names: Arc<[String]>,
    pub(crate) variables: Vec<VariableInfo>,
    pub(crate) commands: Vec<CompiledCommand>,
    pub(crate) local: Vec<usize>,
    pub(crate) sync: Vec<SyncGroup>,
    pub(crate) labels: BTreeMap<String, CExpr>,
    pub(crate) constants: BTreeMap<String, Lit>,
    pub(crate) initial: StateValuation,
    module_names: Vec<String>,
}

impl ElaboratedModel {
    /// Variable declarations, sorted by name (the state vector order).
    pub fn variables(&self) -> &[VariableInfo] {
        &self.variables
    }

    pub fn initial_state(&self) -> &StateValuation {
        &self.initial
    }

    pub fn constants(&self) -> &BTreeMap<String, Lit> {
        &self.constants
    }

    pub fn label_names(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }

    pub fn module_names(&self) -> &[String] {
        &self.module_names
    }

    pub fn command_count(&self) -> usize {
        self.commands.len()
    }

    /// The probabilities of each command's updates, in declaration order.
    pub fn update_probabilities(&self) -> Vec<Vec<f64>> {
        self.commands
            .iter()
            .map(|c| c.updates.iter().map(|u| u.prob).collect())
            .collect()
    }

    /// Actions on which several modules synchronize.
    pub fn synchronized_actions(&self) -> impl Iterator<Item = &str> {
        self.sync.iter().map(|g| g.action.as_str())
    }

    /// Compiles a boolean expression over the model variables and constants.
    pub(crate) fn compile_predicate(&self, expr: &Expr) -> Result<CExpr, ModelError> {
        let slots: HashMap<String, (usize, Ty)> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), (i, var_ty(v.kind))))
            .collect();
        let scope = Scope {
            constants: &self.constants,
            vars: &slots,
        };
        compile_bool(&scope, expr, Position::default(), "predicate")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Double,
    Bool,
}

impl Ty {
    fn numeric(self) -> bool {
        matches!(self, Ty::Int | Ty::Double)
    }

    fn name(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Double => "double",
            Ty::Bool => "bool",
        }
    }
}

fn var_ty(kind: VariableKind) -> Ty {
    match kind {
        VariableKind::Int { .. } => Ty::Int,
        VariableKind::Bool => Ty::Bool,
    }
}

struct Scope<'a> {
    constants: &'a BTreeMap<String, Lit>,
    vars: &'a HashMap<String, (usize, Ty)>,
}

fn lit_ty(l: Lit) -> Ty {
    match l {
        Lit::Int(_) => Ty::Int,
        Lit::Real(_) => Ty::Double,
        Lit::Bool(_) => Ty::Bool,
    }
}

fn compile(scope: &Scope<'_>, e: &Expr, pos: Position) -> Result<(CExpr, Ty), ModelError> {
    let mismatch = |message: String| ModelError::TypeMismatch { pos, message };
    Ok(match e {
        Expr::Int(v) => (CExpr::Lit(Lit::Int(*v)), Ty::Int),
        Expr::Real(v) => (CExpr::Lit(Lit::Real(*v)), Ty::Double),
        Expr::Bool(b) => (CExpr::Lit(Lit::Bool(*b)), Ty::Bool),
        Expr::Ident(name) => {
            if let Some((slot, ty)) = scope.vars.get(name) {
                (CExpr::Var(*slot), *ty)
            } else if let Some(l) = scope.constants.get(name) {
                (CExpr::Lit(*l), lit_ty(*l))
            } else {
                return Err(ModelError::UnknownIdentifier {
                    pos,
                    name: name.clone(),
                });
            }
        }
        Expr::Unary(UnaryOp::Not, inner) => {
            let (c, ty) = compile(scope, inner, pos)?;
            if ty != Ty::Bool {
                return Err(mismatch(format!("`!` applied to {} in `{e}`", ty.name())));
            }
            (CExpr::Not(Box::new(c)), Ty::Bool)
        }
        Expr::Unary(UnaryOp::Neg, inner) => {
            let (c, ty) = compile(scope, inner, pos)?;
            if !ty.numeric() {
                return Err(mismatch(format!("`-` applied to {} in `{e}`", ty.name())));
            }
            (CExpr::Neg(Box::new(c)), ty)
        }
        Expr::Binary(op, a, b) => {
            let (ca, ta) = compile(scope, a, pos)?;
            let (cb, tb) = compile(scope, b, pos)?;
            let bad = || {
                mismatch(format!(
                    "`{}` applied to {} and {} in `{e}`",
                    op.symbol(),
                    ta.name(),
                    tb.name()
                ))
            };
            let ty = match op {
                BinaryOp::And | BinaryOp::Or | BinaryOp::Implies | BinaryOp::Iff => {
                    if ta != Ty::Bool || tb != Ty::Bool {
                        return Err(bad());
                    }
                    Ty::Bool
                }
                BinaryOp::Eq | BinaryOp::Neq => {
                    if !(ta == tb || (ta.numeric() && tb.numeric())) {
                        return Err(bad());
                    }
                    Ty::Bool
                }
                BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                    if !(ta.numeric() && tb.numeric()) {
                        return Err(bad());
                    }
                    Ty::Bool
                }
                BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
                    if !(ta.numeric() && tb.numeric()) {
                        return Err(bad());
                    }
                    if ta == Ty::Int && tb == Ty::Int {
                        Ty::Int
                    } else {
                        Ty::Double
                    }
                }
                BinaryOp::Div => {
                    if !(ta.numeric() && tb.numeric()) {
                        return Err(bad());
                    }
                    Ty::Double
                }
            };
            (CExpr::Bin(*op, Box::new(ca), Box::new(cb)), ty)
        }
        Expr::Call(f, args) => {
            let mut compiled = Vec::with_capacity(args.len());
            let mut ty = Ty::Int;
            for a in args {
                let (c, t) = compile(scope, a, pos)?;
                if !t.numeric() {
                    return Err(mismatch(format!("non-numeric argument in `{e}`")));
                }
                if t == Ty::Double {
                    ty = Ty::Double;
                }
                compiled.push(c);
            }
            (CExpr::Call(*f, compiled), ty)
        }
    })
}

/// Compiles an int/bool-only boolean expression (guards, labels).
fn compile_bool(
    scope: &Scope<'_>,
    e: &Expr,
    pos: Position,
    what: &str,
) -> Result<CExpr, ModelError> {
    let (c, ty) = compile(scope, e, pos)?;
    if ty != Ty::Bool {
        return Err(ModelError::TypeMismatch {
            pos,
            message: format!("{what} `{e}` has type {}, expected bool", ty.name()),
        });
    }
    if c.uses_double() {
        return Err(ModelError::TypeMismatch {
            pos,
            message: format!("{what} `{e}` uses a double value; only int and bool are allowed"),
        });
    }
    Ok(c.fold())
}

fn const_eval(
    scope: &Scope<'_>,
    e: &Expr,
    pos: Position,
) -> Result<Lit, ModelError> {
    let (c, _) = compile(scope, e, pos)?;
    c.eval(&[])
        .map_err(|message| ModelError::Evaluation { pos, message })
}

fn coerce(name: &str, ty: ConstType, value: Lit, pos: Position) -> Result<Lit, ModelError> {
    match (ty, value) {
        (ConstType::Int, Lit::Int(_))
        | (ConstType::Bool, Lit::Bool(_))
        | (ConstType::Double, Lit::Real(_)) => Ok(value),
        (ConstType::Double, Lit::Int(v)) => Ok(Lit::Real(v as f64)),
        _ => Err(ModelError::TypeMismatch {
            pos,
            message: format!(
                "constant `{name}` is declared {ty} but given a {} value",
                value.ty()
            ),
        }),
    }
}

struct ConstResolver<'a> {
    decls: BTreeMap<&'a str, &'a ConstDecl>,
    overrides: &'a BTreeMap<String, Lit>,
    resolved: BTreeMap<String, Lit>,
    visiting: BTreeSet<String>,
}

impl ConstResolver<'_> {
    fn resolve(&mut self, name: &str) -> Result<Lit, ModelError> {
        if let Some(l) = self.resolved.get(name) {
            return Ok(*l);
        }
        let decl = self.decls[name];
        let value = if let Some(v) = self.overrides.get(name) {
            *v
        } else if let Some(expr) = &decl.value {
            if !self.visiting.insert(name.to_owned()) {
                return Err(ModelError::Cycle {
                    pos: decl.pos,
                    name: name.to_owned(),
                });
            }
            let mut deps = Vec::new();
            expr.idents(&mut deps);
            for dep in deps {
                if self.decls.contains_key(dep) {
                    self.resolve(dep)?;
                } else {
                    return Err(ModelError::UnknownIdentifier {
                        pos: decl.pos,
                        name: dep.to_owned(),
                    });
                }
            }
            self.visiting.remove(name);
            let empty = HashMap::new();
            let scope = Scope {
                constants: &self.resolved,
                vars: &empty,
            };
            const_eval(&scope, expr, decl.pos)?
        } else {
            return Err(ModelError::UnresolvedConstant {
                name: name.to_owned(),
            });
        };
        let value = coerce(name, decl.ty, value, decl.pos)?;
        self.resolved.insert(name.to_owned(), value);
        Ok(value)
    }
}

fn expand_formulas(ast: &ModelAst) -> Result<HashMap<String, Expr>, ModelError> {
    fn expand(
        name: &str,
        raw: &HashMap<&str, &NamedExpr>,
        done: &mut HashMap<String, Expr>,
        visiting: &mut HashSet<String>,
    ) -> Result<Expr, ModelError> {
        if let Some(e) = done.get(name) {
            return Ok(e.clone());
        }
        let def = raw[name];
        if !visiting.insert(name.to_owned()) {
            return Err(ModelError::Cycle {
                pos: def.pos,
                name: name.to_owned(),
            });
        }
        let mut deps = Vec::new();
        def.expr.idents(&mut deps);
        for dep in deps {
            if raw.contains_key(dep) {
                expand(dep, raw, done, visiting)?;
            }
        }
        visiting.remove(name);
        let body = def.expr.map_idents(&mut |id| done.get(id).cloned());
        done.insert(name.to_owned(), body.clone());
        Ok(body)
    }

    let raw: HashMap<&str, &NamedExpr> = ast.formulas.iter().map(|f| (f.name.as_str(), f)).collect();
    let mut done = HashMap::new();
    let mut visiting = HashSet::new();
    for f in &ast.formulas {
        expand(&f.name, &raw, &mut done, &mut visiting)?;
    }
    Ok(done)
}

fn map_module(m: &ModuleAst, f: &mut impl FnMut(&str) -> Option<Expr>, rename: &dyn Fn(&str) -> String) -> ModuleAst {
    ModuleAst {
        name: m.name.clone(),
        pos: m.pos,
        variables: m
            .variables
            .iter()
            .map(|v| VarDecl {
                name: rename(&v.name),
                ty: match &v.ty {
                    VarType::Bool => VarType::Bool,
                    VarType::Int { low, high } => VarType::Int {
                        low: low.map_idents(f),
                        high: high.map_idents(f),
                    },
                },
                init: v.init.as_ref().map(|e| e.map_idents(f)),
                pos: v.pos,
            })
            .collect(),
        commands: m
            .commands
            .iter()
            .map(|c| CommandAst {
                action: c.action.as_deref().map(rename),
                guard: c.guard.map_idents(f),
                updates: c
                    .updates
                    .iter()
                    .map(|u| UpdateAst {
                        prob: u.prob.map_idents(f),
                        assignments: u
                            .assignments
                            .iter()
                            .map(|(v, e)| (rename(v), e.map_idents(f)))
                            .collect(),
                    })
                    .collect(),
                pos: c.pos,
            })
            .collect(),
    }
}

/// Resolves constants (with `overrides` taking precedence), substitutes
/// formulas, expands renamed modules and compiles all expressions.
pub fn elaborate(
    ast: &ModelAst,
    overrides: &BTreeMap<String, Lit>,
) -> Result<ElaboratedModel, ModelError> {
    let mut resolver = ConstResolver {
        decls: ast.constants.iter().map(|c| (c.name.as_str(), c)).collect(),
        overrides,
        resolved: BTreeMap::new(),
        visiting: BTreeSet::new(),
    };
    if let Some(unknown) = overrides.keys().find(|k| !resolver.decls.contains_key(k.as_str())) {
        return Err(ModelError::UnknownOverride {
            name: unknown.clone(),
        });
    }
    for c in &ast.constants {
        resolver.resolve(&c.name)?;
    }
    let constants = resolver.resolved;

    let formulas = expand_formulas(ast)?;
    let mut subst = |id: &str| formulas.get(id).cloned();
    let identity = |s: &str| s.to_owned();

    let mut concrete: BTreeMap<&str, ModuleAst> = BTreeMap::new();
    for m in &ast.modules {
        if let ModuleDef::Concrete(m) = m {
            concrete.insert(&m.name, map_module(m, &mut subst, &identity));
        }
    }
    let mut modules: Vec<ModuleAst> = Vec::with_capacity(ast.modules.len());
    for def in &ast.modules {
        match def {
            ModuleDef::Concrete(m) => modules.push(concrete[m.name.as_str()].clone()),
            ModuleDef::Renamed {
                name,
                base,
                renames,
                pos,
            } => {
                let Some(base_module) = concrete.get(base.as_str()) else {
                    return Err(ModelError::UnknownModule {
                        pos: *pos,
                        name: base.clone(),
                    });
                };
                let table: BTreeMap<&str, &str> =
                    renames.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                let rename = |s: &str| table.get(s).map_or_else(|| s.to_owned(), |t| (*t).to_owned());
                let mut renamed = map_module(
                    base_module,
                    &mut |id| table.get(id).map(|t| Expr::Ident((*t).to_owned())),
                    &rename,
                );
                renamed.name = name.clone();
                renamed.pos = *pos;
                modules.push(renamed);
            }
        }
    }

    // variables
    let mut taken: HashSet<&str> = constants.keys().map(String::as_str).collect();
    taken.extend(formulas.keys().map(String::as_str));
    let empty = HashMap::new();
    let const_scope = Scope {
        constants: &constants,
        vars: &empty,
    };
    let mut variables = Vec::new();
    for m in &modules {
        for v in &m.variables {
            if !taken.insert(v.name.as_str()) {
                return Err(ModelError::Duplicate {
                    pos: v.pos,
                    name: v.name.clone(),
                });
            }
            let int_bound = |e: &Expr| match const_eval(&const_scope, e, v.pos)? {
                Lit::Int(i) => Ok(i),
                other => Err(ModelError::TypeMismatch {
                    pos: v.pos,
                    message: format!("bound of `{}` must be an int, got {other}", v.name),
                }),
            };
            let (kind, init) = match &v.ty {
                VarType::Bool => {
                    let init = match &v.init {
                        None => false,
                        Some(e) => match const_eval(&const_scope, e, v.pos)? {
                            Lit::Bool(b) => b,
                            other => {
                                return Err(ModelError::TypeMismatch {
                                    pos: v.pos,
                                    message: format!(
                                        "initial value of bool `{}` is {other}",
                                        v.name
                                    ),
                                })
                            }
                        },
                    };
                    (VariableKind::Bool, Value::Bool(init))
                }
                VarType::Int { low, high } => {
                    let (low, high) = (int_bound(low)?, int_bound(high)?);
                    if low > high {
                        return Err(ModelError::Evaluation {
                            pos: v.pos,
                            message: format!("empty range [{low}..{high}] for `{}`", v.name),
                        });
                    }
                    let init = match &v.init {
                        None => low,
                        Some(e) => int_bound(e)?,
                    };
                    if init < low || init > high {
                        return Err(ModelError::InitOutOfBounds {
                            pos: v.pos,
                            variable: v.name.clone(),
                            value: init,
                            low,
                            high,
                        });
                    }
                    (VariableKind::Int { low, high }, Value::Int(init))
                }
            };
            variables.push(VariableInfo {
                name: v.name.clone(),
                module: m.name.clone(),
                kind,
                init,
            });
        }
    }
    drop(taken);
    variables.sort_by(|a, b| a.name.cmp(&b.name));
    let names: Arc<[String]> = variables.iter().map(|v| v.name.clone()).collect::<Vec<_>>().into();
    let slots: HashMap<String, (usize, Ty)> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.clone(), (i, var_ty(v.kind))))
        .collect();
    let scope = Scope {
        constants: &constants,
        vars: &slots,
    };
    let initial = StateValuation::with_names(
        Arc::clone(&names),
        variables.iter().map(|v| v.init).collect::<Vec<_>>().into_boxed_slice(),
    );

    // commands
    let mut commands = Vec::new();
    for m in &modules {
        for (i, c) in m.commands.iter().enumerate() {
            let index = i + 1;
            let command = describe(&m.name, index, c.action.as_deref(), c.pos);
            let guard = compile_bool(&scope, &c.guard, c.pos, "guard")?;
            let mut updates = Vec::with_capacity(c.updates.len());
            let mut sum = 0.0;
            for u in &c.updates {
                let (p, ty) = compile(&scope, &u.prob, c.pos)?;
                if !ty.numeric() {
                    return Err(ModelError::TypeMismatch {
                        pos: c.pos,
                        message: format!("probability `{}` is not a number", u.prob),
                    });
                }
                let prob = match p.fold() {
                    CExpr::Lit(l) => l.as_f64().unwrap_or(f64::NAN),
                    _ => {
                        return Err(ModelError::Evaluation {
                            pos: c.pos,
                            message: format!(
                                "probability `{}` of command {command} depends on the state",
                                u.prob
                            ),
                        })
                    }
                };
                if !(prob > 0.0 && prob <= 1.0) {
                    return Err(ModelError::ProbabilityRange {
                        pos: c.pos,
                        command,
                        value: prob,
                    });
                }
                sum += prob;
                let mut assigned: HashSet<&str> = HashSet::new();
                let mut assignments = Vec::with_capacity(u.assignments.len());
                for (var, value) in &u.assignments {
                    let Some(&(slot, ty)) = slots.get(var) else {
                        return Err(ModelError::UnknownIdentifier {
                            pos: c.pos,
                            name: var.clone(),
                        });
                    };
                    if variables[slot].module != m.name {
                        return Err(ModelError::ForeignAssignment {
                            pos: c.pos,
                            module: m.name.clone(),
                            variable: var.clone(),
                        });
                    }
                    if !assigned.insert(var) {
                        return Err(ModelError::Duplicate {
                            pos: c.pos,
                            name: format!("{var}'"),
                        });
                    }
                    let (compiled, vty) = compile(&scope, value, c.pos)?;
                    if vty != ty || compiled.uses_double() {
                        return Err(ModelError::TypeMismatch {
                            pos: c.pos,
                            message: format!(
                                "`{var}` has type {} but is assigned `{value}`",
                                ty.name()
                            ),
                        });
                    }
                    assignments.push((slot, compiled.fold()));
                }
                updates.push(CompiledUpdate { prob, assignments });
            }
            if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                return Err(ModelError::ProbabilitySum {
                    pos: c.pos,
                    command,
                    sum,
                });
            }
            commands.push(CompiledCommand {
                module: m.name.clone(),
                index,
                action: c.action.clone(),
                guard,
                updates,
                pos: c.pos,
            });
        }
    }

    // an action shared by two or more modules synchronizes them
    let module_names: Vec<String> = modules.iter().map(|m| m.name.clone()).collect();
    let mut by_action: BTreeMap<&str, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for (ci, c) in commands.iter().enumerate() {
        if let Some(a) = &c.action {
            let mi = module_names.iter().position(|n| *n == c.module).expect("known module");
            by_action.entry(a).or_default().entry(mi).or_default().push(ci);
        }
    }
    let mut local: Vec<usize> = Vec::new();
    let mut sync = Vec::new();
    for (action, per_module) in &by_action {
        if per_module.len() >= 2 {
            sync.push(SyncGroup {
                action: (*action).to_owned(),
                modules: per_module.values().cloned().collect(),
            });
        } else {
            local.extend(per_module.values().flatten());
        }
    }
    local.extend(
        commands
            .iter()
            .enumerate()
            .filter(|(_, c)| c.action.is_none())
            .map(|(i, _)| i),
    );
    local.sort_unstable();

    let mut labels = BTreeMap::new();
    for l in &ast.labels {
        let expr = l.expr.map_idents(&mut subst);
        labels.insert(l.name.clone(), compile_bool(&scope, &expr, l.pos, "label")?);
    }

    Ok(ElaboratedModel {
        names,
        variables,
        commands,
        local,
        sync,
        labels,
        constants,
        initial,
        module_names,
    })
}
