//! Builds the full mutation matrix of a small project and classifies its
//! methods as effectively or ineffectively tested.

use tplab::interp::{run_suite, HookConfig};
use tplab::lang::parse_source;
use tplab::mutation::{evaluate_matrix, EvalOptions, MatrixMode};

const SOURCE: &str = r#"
fn scale(x: int) -> int { return x * 3; }
fn offset(x: int) -> int {
    if x > 5 {
        let ignored = scale(x);
    }
    return x + 5;
}
fn positive(x: int) -> bool { return x > 0; }
fn label(x: int) -> str { return str_cat("n", "x"); }

test loose { let r = offset(2); assert r > 0 || r <= 0; }
test strict { assert offset(8) == 13; }
test sign { assert positive(3); assert !positive(-1); }
test naming { let s = label(1); }
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_source("matrix_demo", SOURCE)?;
    let log = run_suite(&program, HookConfig::default());
    let matrix = evaluate_matrix(&program, &log, MatrixMode::Full, EvalOptions::default())?;
    matrix.write_matrix_csv(std::io::stdout())?;
    println!();
    for v in matrix.classify_methods()? {
        println!("{:<8} {}", v.method_id, v.verdict.label());
    }
    let kinds = matrix.kill_event_report()?;
    println!("method kills: {:?}", kinds.method);
    Ok(())
}
