//! Records the minimal stack distance of every (method, test) pair,
//! including calls made from a spawned thread.

use tplab::interp::{run_suite, HookConfig};
use tplab::lang::parse_source;

const SOURCE: &str = r#"
fn leaf(x: int) -> int { return x + 1; }
fn middle(x: int) -> int { return leaf(x) * 2; }
fn top(x: int) -> int { return middle(x) + leaf(x); }
fn background() -> void { let v = middle(1); }
fn starter() -> void { spawn background(); }

test direct { assert top(1) == 6; }
test threaded { starter(); }
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_source("distance_demo", SOURCE)?;
    let log = run_suite(&program, HookConfig::default());
    println!("{:<12} {:<10} {:>8} {:>6}", "method", "test", "distance", "calls");
    for r in log.traces.values() {
        println!("{:<12} {:<10} {:>8} {:>6}", r.method_id, r.test_id, r.min_stack_distance, r.invocation_count);
    }
    for f in &program.functions {
        println!("d({}) = {}", f.name, log.method_distance(&program, &f.name)?);
    }
    Ok(())
}
