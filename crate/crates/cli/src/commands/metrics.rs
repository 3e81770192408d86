use std::fs;
use std::path::{Path, PathBuf};

use evdeblur::imaging::{mse, psnr_from_mse, read_pgm, ssim, Psnr};
use serde_json::json;

use crate::args::MetricsArgs;
use crate::error::{CliError, CliResult};
use crate::output::write_json;

fn pgm_names(dir: &Path) -> CliResult<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let path: PathBuf = entry.path();
        if path.extension().is_some_and(|e| e == "pgm") {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.push(name.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

fn psnr_json(p: Psnr) -> serde_json::Value {
    match p {
        Psnr::Identical => json!("identical"),
        Psnr::Db(db) => json!(db),
    }
}

pub fn run(args: &MetricsArgs) -> CliResult<()> {
    let reference = pgm_names(&args.reference)?;
    let test = pgm_names(&args.test)?;
    if reference.len() != test.len() {
        return Err(CliError::Usage(format!(
            "frame counts differ: {} reference, {} test",
            reference.len(),
            test.len()
        )));
    }
    if reference != test {
        return Err(CliError::Usage(
            "frame names differ between the directories".into(),
        ));
    }
    if reference.is_empty() {
        return Err(CliError::Usage("no .pgm frames to compare".into()));
    }
    let width = reference.iter().map(String::len).max().unwrap_or(5).max(5);
    println!("{:<width$}  {:>12}  {:>8}", "frame", "psnr_db", "ssim");
    let mut rows = Vec::new();
    let (mut mse_sum, mut finite_psnr, mut finite_count, mut ssim_sum) = (0.0, 0.0, 0usize, 0.0);
    for name in &reference {
        let a = read_pgm(&args.reference.join(name))?;
        let b = read_pgm(&args.test.join(name))?;
        let m = mse(&a, &b)?;
        let p = psnr_from_mse(m);
        let s = ssim(&a, &b)?;
        println!("{name:<width$}  {:>12}  {s:>8.5}", p.to_string());
        if let Psnr::Db(db) = p {
            finite_psnr += db;
            finite_count += 1;
        }
        mse_sum += m;
        ssim_sum += s;
        rows.push(json!({ "frame": name, "mse": m, "psnr": psnr_json(p), "ssim": s }));
    }
    let n = reference.len() as f64;
    // frames that match exactly have no finite PSNR and are left out of the mean
    let mean_psnr = if finite_count == 0 {
        Psnr::Identical
    } else {
        Psnr::Db(finite_psnr / finite_count as f64)
    };
    let mean_ssim = ssim_sum / n;
    println!(
        "{:<width$}  {:>12}  {mean_ssim:>8.5}",
        "mean",
        mean_psnr.to_string()
    );
    let summary = json!({
        "frames": rows,
        "mean_psnr": psnr_json(mean_psnr),
        "mean_ssim": mean_ssim,
        "mean_mse": mse_sum / n,
    });
    println!("{}", serde_json::to_string(&summary)?);
    if let Some(path) = &args.json {
        write_json(path, &summary)?;
    }
    Ok(())
}
