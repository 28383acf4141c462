//! Client for an external XFOIL-compatible panel solver driven through a
//! scripted stdin session.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::EvalFailure;

use super::aero::{AeroCoefficients, AeroModel};
use super::geometry::{kt_transform, AirfoilGeometry, KtParams};

/// Solver settings. The panel count, iteration limit and timeout are not
/// prescribed by the method; these defaults are ordinary XFOIL usage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XfoilConfig {
    pub binary: Option<PathBuf>,
    pub timeout_secs: f64,
    /// Viscous iteration limit (`ITER`).
    pub iterations: u32,
    /// Contour points written to the coordinate file; the solver re-panels
    /// with `PANE`.
    pub points: usize,
    /// Scratch directory for coordinate and polar files; defaults to a
    /// per-process directory under the system temp dir.
    pub work_dir: Option<PathBuf>,
}

impl Default for XfoilConfig {
    fn default() -> Self {
        Self {
            binary: None,
            timeout_secs: 30.0,
            iterations: 100,
            points: 200,
            work_dir: None,
        }
    }
}

/// One row of a polar accumulation file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRow {
    pub alpha: f64,
    pub cl: f64,
    pub cd: f64,
}

/// Rows below the dashed separator line of a polar file.
pub fn parse_polar(text: &str) -> Result<Vec<PolarRow>, EvalFailure> {
    let mut lines = text.lines();
    if !lines.any(|l| l.trim_start().starts_with("---")) {
        return Err(EvalFailure::Parse("no polar table header".into()));
    }
    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(EvalFailure::Parse(format!("short polar row {line:?}")));
        }
        let num = |s: &str| {
            s.replace(['D', 'd'], "E")
                .parse::<f64>()
                .map_err(|_| EvalFailure::Parse(format!("bad number {s:?} in {line:?}")))
        };
        rows.push(PolarRow {
            alpha: num(fields[0])?,
            cl: num(fields[1])?,
            cd: num(fields[2])?,
        });
    }
    Ok(rows)
}

/// Command session: load the coordinates, re-panel, run one viscous point
/// with polar accumulation, quit.
pub fn session_script(
    coordinates: &Path,
    polar: &Path,
    alpha: f64,
    reynolds: f64,
    iterations: u32,
) -> String {
    format!(
        "PLOP\nG\n\nLOAD {}\nmcmo\nPANE\nOPER\nVISC {reynolds:.1}\nITER {iterations}\nPACC\n{}\n\nALFA {alpha:.6}\nPACC\n\nQUIT\n",
        coordinates.display(),
        polar.display(),
    )
}

pub struct XfoilClient {
    binary: PathBuf,
    config: XfoilConfig,
    work_dir: PathBuf,
    counter: AtomicU64,
    lock: Mutex<()>,
}

impl XfoilClient {
    pub fn new(config: XfoilConfig) -> Result<Self> {
        let binary = config.binary.clone().ok_or_else(|| {
            Error::Config("xfoil.binary is required for the airfoil-external problem".into())
        })?;
        if !(config.timeout_secs.is_finite() && config.timeout_secs > 0.0) {
            return Err(Error::Config("xfoil.timeout_secs must be positive".into()));
        }
        if config.points < 40 {
            return Err(Error::Config("xfoil.points must be at least 40".into()));
        }
        let work_dir = config.work_dir.clone().unwrap_or_else(|| {
            std::env::temp_dir().join(format!("mcmo-xfoil-{}", std::process::id()))
        });
        std::fs::create_dir_all(&work_dir)
            .map_err(|e| Error::io(format!("creating {}", work_dir.display()), e))?;
        Ok(Self {
            binary,
            config,
            work_dir,
            counter: AtomicU64::new(0),
            lock: Mutex::new(()),
        })
    }

    pub fn config(&self) -> &XfoilConfig {
        &self.config
    }

    /// Runs the solver on `geometry` at incidence `alpha` (degrees).
    pub fn run(
        &self,
        geometry: &AirfoilGeometry,
        alpha: f64,
        reynolds: f64,
    ) -> Result<AeroCoefficients, EvalFailure> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let k = self.counter.fetch_add(1, Ordering::Relaxed);
        let coordinates = self.work_dir.join(format!("airfoil_{k}.dat"));
        let polar = self.work_dir.join(format!("polar_{k}.txt"));
        let result = self.run_files(geometry, alpha, reynolds, &coordinates, &polar);
        let _ = std::fs::remove_file(&coordinates);
        let _ = std::fs::remove_file(&polar);
        result
    }

    fn run_files(
        &self,
        geometry: &AirfoilGeometry,
        alpha: f64,
        reynolds: f64,
        coordinates: &Path,
        polar: &Path,
    ) -> Result<AeroCoefficients, EvalFailure> {
        let io = |e: std::io::Error| EvalFailure::Io(e.to_string());
        std::fs::write(coordinates, geometry.to_coordinate_text()).map_err(io)?;
        let _ = std::fs::remove_file(polar);

        let mut child = Command::new(&self.binary)
            .current_dir(&self.work_dir)
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(io)?;
        let script = session_script(coordinates, polar, alpha, reynolds, self.config.iterations);
        if let Some(mut stdin) = child.stdin.take() {
            // A solver that exits early closes the pipe; its status decides.
            let _ = stdin.write_all(script.as_bytes());
        }

        let deadline = Instant::now() + Duration::from_secs_f64(self.config.timeout_secs);
        let status = loop {
            if let Some(status) = child.try_wait().map_err(io)? {
                break status;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(EvalFailure::Timeout);
            }
            std::thread::sleep(Duration::from_millis(2));
        };
        if !status.success() {
            return Err(EvalFailure::ExitStatus(status.code().unwrap_or(-1)));
        }

        let text = std::fs::read_to_string(polar)
            .map_err(|e| EvalFailure::Parse(format!("polar file: {e}")))?;
        let row = parse_polar(&text)?
            .pop()
            .ok_or(EvalFailure::NonConvergence)?;
        if !(row.cl.is_finite() && row.cd.is_finite() && row.cd > 0.0) {
            return Err(EvalFailure::NonFinite);
        }
        Ok(AeroCoefficients {
            cl: row.cl,
            cd: row.cd,
        })
    }
}

impl AeroModel for XfoilClient {
    fn coefficients(
        &self,
        params: &KtParams,
        reynolds: f64,
    ) -> Result<AeroCoefficients, EvalFailure> {
        let geometry = kt_transform(params, self.config.points)
            .map_err(|e| EvalFailure::Domain(e.to_string()))?;
        self.run(&geometry, params.alpha, reynolds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const POLAR: &str = "\
       XFOIL         Version 6.99

 Calculated polar for: mcmo

 Mach =   0.000     Re =     1.000 e 6     Ncrit =   9.000

   alpha    CL        CD       CDp       CM     Top_Xtr  Bot_Xtr
  ------ -------- --------- --------- -------- -------- --------
   4.000   0.7215   0.00712   0.00231  -0.0512   0.5563   1.0000
";

    #[test]
    fn parses_polar_rows() {
        let rows = parse_polar(POLAR).unwrap();
        assert_eq!(
            rows,
            vec![PolarRow {
                alpha: 4.0,
                cl: 0.7215,
                cd: 0.00712
            }]
        );
        let sci = POLAR.replace("0.00712", "7.12E-03");
        assert_eq!(parse_polar(&sci).unwrap()[0].cd, 7.12e-3);
        let empty = POLAR.lines().take(8).collect::<Vec<_>>().join("\n");
        assert_eq!(parse_polar(&empty).unwrap(), vec![]);
        assert!(matches!(parse_polar("garbage"), Err(EvalFailure::Parse(_))));
        let bad = POLAR.replace("0.7215", "0.72.15");
        assert!(matches!(parse_polar(&bad), Err(EvalFailure::Parse(_))));
    }

    #[test]
    fn script_shape() {
        let s = session_script(Path::new("a.dat"), Path::new("p.txt"), 4.0, 1e6, 80);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines.contains(&"LOAD a.dat"));
        assert!(lines.contains(&"VISC 1000000.0"));
        assert!(lines.contains(&"ITER 80"));
        assert!(lines.contains(&"ALFA 4.000000"));
        let pacc = lines.iter().position(|l| *l == "PACC").unwrap();
        assert_eq!(lines[pacc + 1], "p.txt");
        assert_eq!(lines.last(), Some(&"QUIT"));
    }

    #[test]
    fn requires_a_binary() {
        assert!(matches!(
            XfoilClient::new(XfoilConfig::default()),
            Err(Error::Config(_))
        ));
    }
}
