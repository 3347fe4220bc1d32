//! Generators for the parametric benchmark models.

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("the ring size must be odd and at least 3, got {0}")]
    RingSize(u32),
    #[error("need at least 3 philosophers, got {0}")]
    TableSize(u32),
}

/// Herman's synchronous self-stabilising ring of `n` processes.
///
/// Process `i` holds a token when its bit equals its predecessor's.
/// Token holders flip a fair coin, the others copy their predecessor; all
/// processes move together on the shared `step` action. Every process
/// starts with bit 0, so initially all of them hold a token.
pub fn generate_herman(n: u32) -> Result<String, GenerateError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(GenerateError::RingSize(n));
    }
    let mut out = String::new();
    writeln!(out, "// Herman's self-stabilising ring with {n} processes.").unwrap();
    writeln!(out, "// Generated by `flycheck gen-herman {n}`.").unwrap();
    out.push_str("dtmc\n\n");
    out.push_str("module process1\n");
    out.push_str("  x1 : [0..1] init 0;\n\n");
    writeln!(out, "  [step] (x1=x{n}) -> 0.5 : (x1'=0) + 0.5 : (x1'=1);").unwrap();
    writeln!(out, "  [step] !(x1=x{n}) -> (x1'=x{n});").unwrap();
    out.push_str("endmodule\n\n");
    for i in 2..=n {
        writeln!(out, "module process{i} = process1 [ x1=x{i}, x{n}=x{} ] endmodule", i - 1).unwrap();
    }
    out.push('\n');
    let terms: Vec<String> = (1..=n)
        .map(|i| {
            let prev = if i == 1 { n } else { i - 1 };
            format!("(1-(x{i}-x{prev})*(x{i}-x{prev}))")
        })
        .collect();
    writeln!(out, "formula num_tokens = {};", terms.join(" + ")).unwrap();
    out.push('\n');
    out.push_str("label \"stable\" = num_tokens=1;\n");
    writeln!(out, "label \"token1\" = x1=x{n};").unwrap();
    Ok(out)
}

/// A randomized dining philosophers table with `n` seats.
///
/// Local states: 0 thinking, 1 hungry, 2 holding the left fork, 3 holding
/// the right fork, 4 eating. A hungry philosopher flips a coin to choose
/// which fork to try first; holding one fork, it eats if the other is
/// free and otherwise puts its fork down and is hungry again. Moves are
/// interleaved: in every state each philosopher has exactly one enabled
/// command and the scheduler picks one uniformly.
pub fn generate_philosophers(n: u32) -> Result<String, GenerateError> {
    if n < 3 {
        return Err(GenerateError::TableSize(n));
    }
    let mut out = String::new();
    writeln!(out, "// Randomized dining philosophers with {n} seats.").unwrap();
    writeln!(out, "// Generated by `flycheck gen-philosophers {n}`.").unwrap();
    out.push_str("dtmc\n\n");
    writeln!(out, "// the left fork of p1 is the right fork of p{n}").unwrap();
    writeln!(out, "formula lfree = !(p{n}=3 | p{n}=4);").unwrap();
    out.push_str("formula rfree = !(p2=2 | p2=4);\n\n");
    out.push_str(
        "module phil1
  p1 : [0..4] init 0;

  [] p1=0 -> (p1'=1);
  [] p1=1 & lfree & rfree -> 0.5 : (p1'=2) + 0.5 : (p1'=3);
  [] p1=1 & lfree & !rfree -> 0.5 : (p1'=2) + 0.5 : (p1'=1);
  [] p1=1 & !lfree & rfree -> 0.5 : (p1'=1) + 0.5 : (p1'=3);
  [] p1=1 & !lfree & !rfree -> (p1'=1);
  [] p1=2 & rfree -> (p1'=4);
  [] p1=2 & !rfree -> (p1'=1);
  [] p1=3 & lfree -> (p1'=4);
  [] p1=3 & !lfree -> (p1'=1);
  [] p1=4 -> (p1'=0);
endmodule

",
    );
    for i in 2..=n {
        let right = if i == n { 1 } else { i + 1 };
        let left = i - 1;
        // renamings are simultaneous, so p2 -> p3 and p3 -> p1 do not chain
        writeln!(out, "module phil{i} = phil1 [ p1=p{i}, p2=p{right}, p{n}=p{left} ] endmodule").unwrap();
    }
    out.push('\n');
    out.push_str("label \"eat1\" = p1=4;\n");
    let others: Vec<String> = (2..=n).map(|i| format!("p{i}=4")).collect();
    writeln!(out, "label \"eatother\" = {};", others.join(" | ")).unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(generate_herman(4), Err(GenerateError::RingSize(4)));
        assert_eq!(generate_herman(1), Err(GenerateError::RingSize(1)));
        assert_eq!(generate_philosophers(2), Err(GenerateError::TableSize(2)));
    }

    #[test]
    fn herman3_text() {
        let text = generate_herman(3).unwrap();
        assert!(text.contains("module process3 = process1 [ x1=x3, x3=x2 ] endmodule"));
        assert!(text.contains("label \"token1\" = x1=x3;"));
    }
}
