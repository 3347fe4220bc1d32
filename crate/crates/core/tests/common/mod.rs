#![allow(dead_code)]

use std::collections::BTreeMap;

use flycheck_core::prism::{build_semantics, elaborate, parse_model, PrismModel};
use flycheck_core::{parse_property, StateFormula};

/// s0 ->0.5 goal, ->0.3 s0, ->0.2 dead; goal and dead loop.
pub const CHAIN: &str = "dtmc
module chain
  s : [0..2] init 0;
  [] s=0 -> 0.5:(s'=1) + 0.3:(s'=0) + 0.2:(s'=2);
  [] s>0 -> true;
endmodule
label \"goal\" = s=1;
label \"dead\" = s=2;
";

/// Two states cycling forever, no goal anywhere.
pub const CYCLE: &str = "dtmc
module cycle
  s : [0..1] init 0;
  [] true -> (s'=1-s);
endmodule
label \"goal\" = false;
label \"dead\" = false;
";

/// s0 retries until it reaches the goal; nothing can fail.
pub const RETRY: &str = "dtmc
module retry
  s : [0..1] init 0;
  [] s=0 -> 0.5:(s'=1) + 0.5:(s'=0);
  [] s=1 -> true;
endmodule
label \"goal\" = s=1;
label \"dead\" = false;
";

/// From s0: 0.5 to a Φ1-only trap (s=3, loops on itself), 0.25 to goal,
/// 0.25 to dead. The trap is a bottom component without goal or dead.
pub const TRAP: &str = "dtmc
module trap
  s : [0..3] init 0;
  [] s=0 -> 0.25:(s'=1) + 0.25:(s'=2) + 0.5:(s'=3);
  [] s>0 -> true;
endmodule
label \"goal\" = s=1;
label \"dead\" = s=2;
";

pub const HERMAN3: &str = "dtmc
module process1
  x1 : [0..1] init 0;
  [step] (x1=x3) -> 0.5 : (x1'=0) + 0.5 : (x1'=1);
  [step] !(x1=x3) -> (x1'=x3);
endmodule
module process2 = process1 [ x1=x2, x3=x1 ] endmodule
module process3 = process1 [ x1=x3, x3=x2 ] endmodule
formula num_tokens = (1-(x1-x3)*(x1-x3)) + (1-(x2-x1)*(x2-x1)) + (1-(x3-x2)*(x3-x2));
label \"stable\" = num_tokens=1;
label \"token1\" = x1=x3;
";

pub fn model(src: &str) -> PrismModel {
    build_semantics(elaborate(&parse_model(src).unwrap(), &BTreeMap::new()).unwrap())
}

pub fn prop(text: &str) -> StateFormula {
    parse_property(text).unwrap().formula
}
