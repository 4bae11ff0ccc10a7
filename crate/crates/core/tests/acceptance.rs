//! Acceptance suite: runs every catalog experiment at full size and prints one
//! line per criterion. `ACCEPTANCE_ONLY=3,10` restricts the run to the
//! experiments deciding those criteria.

use std::collections::BTreeSet;
use std::process::ExitCode;

use analyticity_lab::harness::{experiment_for, format_result, init_threads, list_experiments, run_experiment, RunConfig};

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    let wanted: Option<BTreeSet<u32>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut order: Vec<&'static str> = Vec::new();
    for id in 1..=10 {
        if wanted.as_ref().map_or(true, |w| w.contains(&id)) {
            let e = experiment_for(id).expect("every criterion has an experiment");
            if !order.contains(&e) {
                order.push(e);
            }
        }
    }
    let catalog = list_experiments();
    let mut lines = Vec::new();
    for id in order {
        let cfg: RunConfig = catalog.iter().find(|e| e.id == id).unwrap().config.clone();
        match run_experiment(&cfg) {
            Ok(rep) => {
                for c in rep.criteria {
                    let line = format_result(&c);
                    println!("{line}");
                    lines.push((c.id, c.pass, line));
                }
            }
            Err(e) => {
                println!("experiment {id} did not run: {e}");
                for c in catalog.iter().find(|e| e.id == id).unwrap().criteria.iter() {
                    lines.push((*c, false, format!("criterion {c:>2} FAIL (experiment error)")));
                }
            }
        }
    }
    lines.sort_by_key(|l| l.0);
    let failed: Vec<u32> = lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!();
    println!("summary: {} of {} criteria passed", lines.len() - failed.len(), lines.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
