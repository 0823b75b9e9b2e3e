//! One test per acceptance criterion. Each prints a single PASS/FAIL line to
//! the real stdout (bypassing the harness capture) and then asserts.
//!
//! Run with `cargo test -p gsfem-experiments --test acceptance -- --nocapture`
//! to also see the per-cell reports.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use gsfem::Diffusion;
use gsfem_experiments::checks::{asymptotic_ratios, oracle_equivalence, solver_hygiene, superconvergence_bounds, two_d_properties};
use gsfem_experiments::{reproduce_table, Result, TableId, TableOptions, TableReport};

fn reference_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("references")
}

fn options(kappa: Diffusion) -> TableOptions {
    TableOptions {
        reference: reference_dir(),
        kappa,
        ..TableOptions::default()
    }
}

fn announce(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

/// Runs `work`, prints one status line and fails the test on any failing cell
/// or on a runtime over `limit`.
fn criterion(name: &str, limit: Option<Duration>, work: impl FnOnce() -> Result<Vec<TableReport>>) {
    let start = Instant::now();
    let outcome = work();
    let elapsed = start.elapsed();
    let (ok, detail) = match &outcome {
        Err(e) => (false, format!("error: {e}")),
        Ok(reports) => {
            let cells: usize = reports.iter().map(|r| r.cells.len()).sum();
            let failed: Vec<String> = reports
                .iter()
                .flat_map(|r| r.failures().map(move |c| format!("{}[{} / {}]", r.id, c.row, c.column)))
                .collect();
            for r in reports {
                print!("{r}");
            }
            let all = reports.iter().all(TableReport::passed);
            let shown = match failed.len() {
                0 => String::new(),
                k if k <= 4 => format!("; failing: {}", failed.join(", ")),
                k => format!("; failing: {} and {} more", failed[..4].join(", "), k - 4),
            };
            (all, format!("{} of {cells} cells pass{shown}", cells - failed.len()))
        }
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    announce(&format!("{status} {name}: {detail}; {:.2?}{budget}", elapsed));
    assert!(ok, "{name}: {detail}");
    assert!(in_time, "{name}: took {elapsed:.2?}{budget}");
}

#[test]
fn criterion_1_superconvergence_table() {
    criterion("1 superconvergence table", Some(Duration::from_secs(5)), || {
        Ok(vec![reproduce_table(TableId::Superconv, &TableOptions::default())?])
    });
}

#[test]
fn criterion_2_superconvergence_bounds() {
    criterion("2 superconvergence bounds", Some(Duration::from_secs(10)), || {
        Ok(vec![superconvergence_bounds(64)?])
    });
}

#[test]
fn criterion_3_oracle_equivalence() {
    criterion("3 oracle equivalence", Some(Duration::from_secs(30)), || {
        Ok(vec![oracle_equivalence(&[4, 7, 16, 50, 100, 200])?])
    });
}

#[test]
fn criterion_4_condition_number_tables() {
    criterion("4 condition-number tables", Some(Duration::from_secs(120)), || {
        let opts = TableOptions::default();
        [TableId::CondnumT2, TableId::CondnumT4, TableId::RatiosT2, TableId::RatiosT4]
            .into_iter()
            .map(|id| reproduce_table(id, &opts))
            .collect()
    });
}

#[test]
fn criterion_5_asymptotic_ratios() {
    criterion("5 asymptotic ratios", None, || Ok(vec![asymptotic_ratios(200)?]));
}

#[test]
fn criterion_6_variable_diffusion() {
    criterion("6 variable diffusion, kappa = exp(x + x^2)", Some(Duration::from_secs(600)), || {
        Ok(vec![reproduce_table(TableId::VariableKappa, &options(Diffusion::ExpXPlusXSquared))?])
    });
}

/// Not a criterion: the same table with the coefficient that reproduces the
/// printed values.
#[test]
fn criterion_6_companion_exp_x_minus_x2() {
    criterion("6 companion, kappa = exp(x - x^2)", Some(Duration::from_secs(600)), || {
        Ok(vec![reproduce_table(TableId::VariableKappa, &options(Diffusion::ExpXMinusXSquared))?])
    });
}

#[test]
fn criterion_7_two_d_properties() {
    criterion("7 2D properties", Some(Duration::from_secs(300)), || {
        Ok(vec![two_d_properties(&[8, 16, 32])?])
    });
}

#[test]
fn criterion_8_solver_hygiene() {
    criterion("8 solver hygiene", None, || Ok(vec![solver_hygiene()?]));
}
