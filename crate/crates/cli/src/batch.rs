//! Directory-level desmoking with a bounded worker pool.
//!
//! Files are processed independently; spectral kernels are cached per image
//! size. Enhanced images keep their input file name. `summary.csv` holds the
//! per-file results with mean and standard deviation rows and contains
//! nothing timing-dependent, so it is byte-identical for any `--jobs`.
//! Wall times go to `timings.csv` and the printed table.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use desmoke_core::imageio::{load_image, save_image, FileFormat};
use desmoke_core::metrics::re_metric;
use desmoke_core::{build_kernel, desmoke_with_kernel, SolverParams, SpectralKernel};
use rayon::prelude::*;

use crate::args::BatchArgs;
use crate::error::CliError;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const TIMINGS_FILE: &str = "timings.csv";

/// Kernels keyed by `(height, width)` for one parameter set.
#[derive(Debug)]
pub struct KernelCache {
    params: SolverParams,
    kernels: Mutex<HashMap<(usize, usize), Arc<SpectralKernel>>>,
}

impl KernelCache {
    pub fn new(params: SolverParams) -> Self {
        Self {
            params,
            kernels: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, height: usize, width: usize) -> desmoke_core::Result<Arc<SpectralKernel>> {
        let mut map = self.kernels.lock().expect("kernel cache poisoned");
        if let Some(k) = map.get(&(height, width)) {
            return Ok(Arc::clone(k));
        }
        let k = Arc::new(build_kernel(height, width, &self.params)?);
        map.insert((height, width), Arc::clone(&k));
        Ok(k)
    }

    pub fn len(&self) -> usize {
        self.kernels.lock().expect("kernel cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct FileResult {
    pub name: String,
    pub height: usize,
    pub width: usize,
    pub iterations: usize,
    pub converged: bool,
    pub re: f64,
    pub wall_ms: f64,
}

/// Image files directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io_at(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && FileFormat::from_path(p).is_ok())
        .collect();
    files.sort();
    Ok(files)
}

fn process(
    path: &Path,
    out_dir: &Path,
    params: &SolverParams,
    cache: &KernelCache,
) -> Result<FileResult, CliError> {
    let start = Instant::now();
    let image = load_image(path)?;
    let kernel = cache.get(image.height(), image.width())?;
    let result = desmoke_with_kernel(&image, params, &kernel)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    save_image(&result.enhanced, out_dir.join(&name))?;
    let re = re_metric(&image, &result.enhanced)?;
    Ok(FileResult {
        name,
        height: image.height(),
        width: image.width(),
        iterations: result.diag.iterations,
        converged: result.diag.converged,
        re,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn summary_csv(results: &[FileResult]) -> String {
    let mut s = String::from("file,height,width,iterations,converged,re\n");
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.9e}",
            r.name, r.height, r.width, r.iterations, r.converged, r.re
        );
    }
    let iters: Vec<f64> = results.iter().map(|r| r.iterations as f64).collect();
    let res: Vec<f64> = results.iter().map(|r| r.re).collect();
    let (im, is) = mean_std(&iters);
    let (rm, rs) = mean_std(&res);
    let _ = writeln!(s, "mean,,,{im:.6},,{rm:.9e}");
    let _ = writeln!(s, "std,,,{is:.6},,{rs:.9e}");
    s
}

fn timings_csv(results: &[FileResult]) -> String {
    let mut s = String::from("file,wall_ms\n");
    for r in results {
        let _ = writeln!(s, "{},{:.3}", r.name, r.wall_ms);
    }
    s
}

fn table(results: &[FileResult]) -> String {
    let mut s = format!(
        "{:<28} {:>10} {:>6} {:>5} {:>12} {:>10}\n",
        "file", "size", "iters", "conv", "re", "wall ms"
    );
    for r in results {
        let _ = writeln!(
            s,
            "{:<28} {:>10} {:>6} {:>5} {:>12.6} {:>10.1}",
            r.name,
            format!("{}x{}", r.width, r.height),
            r.iterations,
            r.converged,
            r.re,
            r.wall_ms
        );
    }
    let (rm, rs) = mean_std(&results.iter().map(|r| r.re).collect::<Vec<_>>());
    let (im, is) = mean_std(&results.iter().map(|r| r.iterations as f64).collect::<Vec<_>>());
    let (tm, ts) = mean_std(&results.iter().map(|r| r.wall_ms).collect::<Vec<_>>());
    let _ = writeln!(
        s,
        "mean ± std: re {rm:.4} ± {rs:.4}, iterations {im:.1} ± {is:.1}, wall {tm:.1} ± {ts:.1} ms"
    );
    s
}

pub fn cmd_batch<W: Write>(args: &BatchArgs, out: &mut W) -> Result<(), CliError> {
    let params = args.solver.params();
    params.validate()?;
    let files = list_images(&args.input)?;
    if files.is_empty() {
        return Err(CliError::Io(format!(
            "no PNG or PPM images in {}",
            args.input.display()
        )));
    }
    fs::create_dir_all(&args.output).map_err(|e| CliError::io_at(&args.output, e))?;

    let cache = KernelCache::new(params);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs as usize)
        .build()
        .map_err(|e| CliError::Processing(e.to_string()))?;
    let outcomes: Vec<Result<FileResult, CliError>> = pool.install(|| {
        files
            .par_iter()
            .map(|p| process(p, &args.output, &params, &cache))
            .collect()
    });

    let mut results = Vec::with_capacity(files.len());
    for (path, outcome) in files.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => log::error!("skipping {}: {e}", path.display()),
        }
    }
    if results.is_empty() {
        return Err(CliError::Processing(format!(
            "all {} images in {} failed",
            files.len(),
            args.input.display()
        )));
    }
    log::info!("{} distinct image sizes", cache.len());

    let write = |name: &str, body: String| {
        let p = args.output.join(name);
        fs::write(&p, body).map_err(|e| CliError::io_at(&p, e))
    };
    write(SUMMARY_FILE, summary_csv(&results))?;
    write(TIMINGS_FILE, timings_csv(&results))?;
    write!(out, "{}", table(&results)).map_err(|e| CliError::Io(e.to_string()))?;
    if results.len() < files.len() {
        writeln!(out, "{} of {} images failed", files.len() - results.len(), files.len())
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}
