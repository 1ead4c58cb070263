use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Format, ModelSpec, Suite, Tolerances};
use crate::geometry::FdConfig;
use crate::{Error, Result};

/// One evaluated quantity at one sample point and `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    /// Sample index.
    pub index: usize,
    pub t: f64,
    pub point: Vec<f64>,
    pub n: Option<f64>,
    pub quantity: String,
    pub value: Option<f64>,
    /// `N · value` for residual records.
    pub scaled: Option<f64>,
    pub error: Option<String>,
}

impl Record {
    pub(crate) fn new(index: usize, t: f64, point: &[f64], n: Option<f64>, quantity: impl Into<String>) -> Self {
        Record {
            index,
            t,
            point: point.to_vec(),
            n,
            quantity: quantity.into(),
            value: None,
            scaled: None,
            error: None,
        }
    }

    pub(crate) fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub(crate) fn scaled(mut self, v: f64) -> Self {
        self.scaled = Some(v);
        self
    }

    pub(crate) fn failed(mut self, e: &Error) -> Self {
        self.error = Some(e.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NoData,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NoData => "no data",
        }
    }
}

/// A named comparison `value` against `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `value < tolerance`.
    pub(crate) fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value < tolerance,
        }
    }

    /// `lo ≤ value ≤ hi`, reported against `hi`.
    pub(crate) fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance: hi,
            pass: (lo..=hi).contains(&value),
        }
    }

    /// A check that holds trivially because all values vanish.
    pub(crate) fn exact_zero(name: impl Into<String>, value: f64, zero: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance: zero,
            pass: value <= zero,
        }
    }
}

/// Sup of a quantity over the sample at one `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEntry {
    pub n: f64,
    pub quantity: String,
    pub sup: f64,
    pub scaled_sup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub status: Status,
    pub checks: Vec<Check>,
    pub sups: Vec<SupEntry>,
    pub point_errors: usize,
    pub notes: Vec<String>,
}

impl Summary {
    pub(crate) fn from_checks(
        checks: Vec<Check>,
        sups: Vec<SupEntry>,
        point_errors: usize,
        usable: usize,
        tol: &Tolerances,
        notes: Vec<String>,
    ) -> Self {
        let status = if usable == 0 {
            Status::NoData
        } else if point_errors <= tol.max_point_errors && checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        Summary {
            status,
            checks,
            sups,
            point_errors,
            notes,
        }
    }

    pub fn no_data(notes: Vec<String>) -> Self {
        Summary {
            status: Status::NoData,
            checks: Vec::new(),
            sups: Vec::new(),
            point_errors: 0,
            notes,
        }
    }
}

/// Conventions needed to reproduce any number in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub time_chart: &'static str,
    pub curvature_sign: &'static str,
    pub normal_orientation: &'static str,
    pub second_ff_sign: &'static str,
    pub track_normalization: &'static str,
    pub relative_error: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    time_chart: "space-time coordinates (t, y) with time first; backward flows use τ",
    curvature_sign: "Ric positive on round spheres",
    normal_orientation: "unit normal with positive pairing against the model's normal hint; track normal pairs positively with the lifted slice normal",
    second_ff_sign: "h(X, Y) = −g(∇_X Y, ν), H = tr h; outward sphere normal gives H = n/r",
    track_normalization: "track h^Σ compared with its limit after multiplying by tσ_N (τσ_N, σ_N)",
    relative_error: "cross-checks: max |engine − closed form| over a family divided by the family's largest entry; differences below the zero tolerance count as 0",
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub suite: Suite,
    pub variant: Option<&'static str>,
    pub background: ModelSpec,
    pub mcf: Option<ModelSpec>,
    pub backend: &'static str,
    pub closed_form: Option<&'static str>,
    pub n_list: Vec<f64>,
    pub seed: Option<u64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub minimal_admissible_n: Option<f64>,
    pub fd_steps: FdConfig,
    pub tolerances: Tolerances,
    pub conventions: Conventions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub records: Vec<Record>,
    pub summary: Summary,
    pub provenance: Provenance,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One header row plus one row per record.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "t", "point", "n", "quantity", "value", "scaled", "error"])
            .map_err(csv_err)?;
        for r in &self.records {
            let point = r.point.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
            w.write_record([
                r.index.to_string(),
                r.t.to_string(),
                point,
                opt(r.n),
                r.quantity.clone(),
                opt(r.value),
                opt(r.scaled),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Summary and provenance without records, for the CSV sidecar.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            summary: &'a Summary,
            provenance: &'a Provenance,
        }
        let mut s = serde_json::to_string_pretty(&Sidecar {
            summary: &self.summary,
            provenance: &self.provenance,
        })
        .expect("summary serialises");
        s.push('\n');
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Path of the CSV summary sidecar.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".summary.json");
    path.with_file_name(name)
}

/// Writes the report; returns the paths written.
pub fn emit(report: &Report, path: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    match format {
        Format::Json => {
            fs::write(path, report.to_json())?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Csv => {
            fs::write(path, report.to_csv()?)?;
            let side = sidecar_path(path);
            fs::write(&side, report.sidecar_json())?;
            Ok(vec![path.to_path_buf(), side])
        }
    }
}
