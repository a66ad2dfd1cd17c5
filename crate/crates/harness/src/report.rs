//! Report emission: AU-ARC tables (4 decimal places plus a full-precision
//! companion), per-measure ARC curve files, and a manifest echoing the
//! configuration and seeds. All CSV output is a pure function of the report,
//! so identical runs produce byte-identical files; timing goes only to the
//! manifest.

use std::fs;
use std::path::Path;

use anyhow::Context;

use crate::experiments::{HybridReport, ShiftReport, StandardReport};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn create_dir(path: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn manifest_header(command: &str, config_echo: &str) -> String {
    let mut text = String::new();
    text.push_str(&format!("reliaq {VERSION}\n"));
    text.push_str(&format!("command = {command}\n"));
    text.push_str(config_echo);
    text
}

fn push_errors(text: &mut String, errors: &[(String, String)]) {
    for (dataset, message) in errors {
        text.push_str(&format!("error {dataset}: {message}\n"));
    }
}

/// Write `au_arc.csv`, `au_arc_full.csv`, `arc/<dataset>/<measure>.csv` and
/// `manifest.txt` for a standard run.
pub fn write_standard(report: &StandardReport, out_dir: &Path) -> anyhow::Result<()> {
    create_dir(out_dir)?;

    let mut table = String::from("dataset,measure,au_arc,winner\n");
    let mut full = String::from("dataset,measure,au_arc\n");
    for ds in &report.datasets {
        for r in &ds.results {
            table.push_str(&format!(
                "{},{},{:.4},{}\n",
                ds.dataset,
                r.measure,
                r.au_arc,
                u8::from(r.winner)
            ));
            full.push_str(&format!("{},{},{}\n", ds.dataset, r.measure, r.au_arc));
        }
    }
    write_file(&out_dir.join("au_arc.csv"), &table)?;
    write_file(&out_dir.join("au_arc_full.csv"), &full)?;

    for ds in &report.datasets {
        let dir = out_dir.join("arc").join(&ds.dataset);
        create_dir(&dir)?;
        for r in &ds.results {
            let mut buf = Vec::new();
            r.curve.write_csv(&mut buf)?;
            let path = dir.join(format!("{}.csv", r.measure));
            fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        }
    }

    let mut manifest = manifest_header("standard", &report.config.echo());
    for ds in &report.datasets {
        manifest.push_str(&format!(
            "dataset {}: seed={} alpha={} train={} test={} accuracy={:.4}\n",
            ds.dataset, ds.dataset_seed, ds.alpha, ds.train_len, ds.test_len, ds.accuracy
        ));
    }
    push_errors(&mut manifest, &report.errors);
    manifest.push_str(&format!("elapsed_ms = {}\n", report.elapsed_ms));
    write_file(&out_dir.join("manifest.txt"), &manifest)
}

/// Write the shift-run outputs: mean AU-ARC table, per-repetition
/// full-precision table, mean ARC curves per cell, and the manifest.
pub fn write_shift(report: &ShiftReport, out_dir: &Path) -> anyhow::Result<()> {
    create_dir(out_dir)?;

    let mut table = String::from("dataset,train_size,beta,measure,au_arc,winner\n");
    let mut full = String::from("dataset,train_size,beta,measure,au_arc\n");
    let mut reps = String::from("dataset,train_size,beta,rep,measure,au_arc\n");
    for cell in &report.cells {
        for m in &cell.measures {
            table.push_str(&format!(
                "{},{},{},{},{:.4},{}\n",
                cell.dataset,
                cell.train_size,
                cell.beta,
                m.measure,
                m.mean_au_arc,
                u8::from(m.winner)
            ));
            full.push_str(&format!(
                "{},{},{},{},{}\n",
                cell.dataset, cell.train_size, cell.beta, m.measure, m.mean_au_arc
            ));
            for (rep, au) in m.rep_au_arcs.iter().enumerate() {
                reps.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    cell.dataset, cell.train_size, cell.beta, rep, m.measure, au
                ));
            }
        }
    }
    write_file(&out_dir.join("au_arc.csv"), &table)?;
    write_file(&out_dir.join("au_arc_full.csv"), &full)?;
    write_file(&out_dir.join("au_arc_reps.csv"), &reps)?;

    for cell in &report.cells {
        let dir = out_dir.join("arc").join(&cell.dataset);
        create_dir(&dir)?;
        for m in &cell.measures {
            let mut buf = Vec::new();
            m.mean_curve.write_csv(&mut buf)?;
            let path = dir.join(format!(
                "{}.N{}_b{}.csv",
                m.measure, cell.train_size, cell.beta
            ));
            fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        }
    }

    let mut manifest = manifest_header("shift", &report.config.echo());
    for cell in &report.cells {
        let seeds: Vec<String> = cell.cell_seeds.iter().map(|s| s.to_string()).collect();
        manifest.push_str(&format!(
            "cell {} N={} beta={}: seeds={}\n",
            cell.dataset,
            cell.train_size,
            cell.beta,
            seeds.join(",")
        ));
    }
    for (dataset, size, beta, reason) in &report.skipped {
        manifest.push_str(&format!(
            "skipped {dataset} N={size} beta={beta}: {reason}\n"
        ));
    }
    push_errors(&mut manifest, &report.errors);
    manifest.push_str(&format!("elapsed_ms = {}\n", report.elapsed_ms));
    write_file(&out_dir.join("manifest.txt"), &manifest)
}

/// Write `hybrid.csv` (one row per dataset and robustness measure), its
/// full-precision companion, and the manifest.
pub fn write_hybrid(report: &HybridReport, out_dir: &Path) -> anyhow::Result<()> {
    create_dir(out_dir)?;

    let header = "dataset,uncertainty,robustness,au_uncertainty,au_robustness,au_hybrid,\
                  gamma_train,mu,gamma_star,gamma_opt,au_gamma_opt,hybrid_wins\n";
    let mut table = String::from(header);
    let mut full = String::from(header);
    for row in &report.rows {
        table.push_str(&format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}\n",
            row.dataset,
            row.uncertainty,
            row.robustness,
            row.au_uncertainty,
            row.au_robustness,
            row.au_hybrid,
            row.gamma_train,
            row.mu,
            row.gamma_star,
            row.gamma_opt,
            row.au_gamma_opt,
            u8::from(row.hybrid_wins)
        ));
        full.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.dataset,
            row.uncertainty,
            row.robustness,
            row.au_uncertainty,
            row.au_robustness,
            row.au_hybrid,
            row.gamma_train,
            row.mu,
            row.gamma_star,
            row.gamma_opt,
            row.au_gamma_opt,
            u8::from(row.hybrid_wins)
        ));
    }
    write_file(&out_dir.join("hybrid.csv"), &table)?;
    write_file(&out_dir.join("hybrid_full.csv"), &full)?;

    let mut manifest = manifest_header("hybrid", &report.config.echo());
    push_errors(&mut manifest, &report.errors);
    manifest.push_str(&format!("elapsed_ms = {}\n", report.elapsed_ms));
    write_file(&out_dir.join("manifest.txt"), &manifest)
}
