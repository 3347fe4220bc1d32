//! Prints a [`ModelAst`] back as model source that parses to the same tree.

use core::fmt;

use super::ast::*;

impl fmt::Display for ModelAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dtmc")?;
        for c in &self.constants {
            write!(f, "\nconst {} {}", c.ty, c.name)?;
            if let Some(v) = &c.value {
                write!(f, " = {v}")?;
            }
            f.write_str(";")?;
        }
        for d in &self.formulas {
            write!(f, "\nformula {} = {};", d.name, d.expr)?;
        }
        for m in &self.modules {
            f.write_str("\n")?;
            match m {
                ModuleDef::Concrete(m) => write!(f, "\n{m}")?,
                ModuleDef::Renamed {
                    name,
                    base,
                    renames,
                    ..
                } => {
                    write!(f, "\nmodule {name} = {base} [")?;
                    for (i, (from, to)) in renames.iter().enumerate() {
                        let sep = if i == 0 { " " } else { ", " };
                        write!(f, "{sep}{from}={to}")?;
                    }
                    f.write_str(" ] endmodule")?;
                }
            }
        }
        if !self.labels.is_empty() {
            f.write_str("\n")?;
        }
        for l in &self.labels {
            write!(f, "\nlabel \"{}\" = {};", l.name, l.expr)?;
        }
        writeln!(f)
    }
}

impl fmt::Display for ModuleAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {}", self.name)?;
        for v in &self.variables {
            write!(f, "  {} : ", v.name)?;
            match &v.ty {
                VarType::Int { low, high } => write!(f, "[{low}..{high}]")?,
                VarType::Bool => f.write_str("bool")?,
            }
            if let Some(init) = &v.init {
                write!(f, " init {init}")?;
            }
            f.write_str(";\n")?;
        }
        if !self.variables.is_empty() && !self.commands.is_empty() {
            f.write_str("\n")?;
        }
        for c in &self.commands {
            writeln!(f, "  {c}")?;
        }
        f.write_str("endmodule")
    }
}

impl fmt::Display for CommandAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} -> ",
            self.action.as_deref().unwrap_or_default(),
            self.guard
        )?;
        for (i, u) in self.updates.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str(";")
    }
}

impl fmt::Display for UpdateAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : ", self.prob)?;
        if self.assignments.is_empty() {
            return f.write_str("true");
        }
        for (i, (var, value)) in self.assignments.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "({var}'={value})")?;
        }
        Ok(())
    }
}
