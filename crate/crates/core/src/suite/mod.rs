//! Verification sweeps over the model catalog and their reports.
//!
//! [`run`] fails only on configuration problems. Evaluation errors at a
//! sample point (domain, degenerate metric) are stored on that point's
//! records and counted in the summary.

mod config;
mod report;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{
    Format, FunctionalSpec, ModelSpec, OutputSpec, RunConfig, SampleSpec, Suite, Tolerances,
};
pub use report::{
    emit, sidecar_path, Check, Conventions, Provenance, Record, Report, Status, Summary,
    SupEntry, CONVENTIONS,
};

use crate::backgrounds::{
    model_background, model_mcf, CatalogBackground, CatalogMcf,
    McfSolution, RicciFlowBackground, Snapshot, BACKGROUND_NAMES, MCF_NAMES,
};
use crate::canonical::{
    build_canonical_metric, canonical_christoffel_closed_form, christoffel_family, lifted_ricci,
    minimal_admissible_n, ricci_soliton_residual, CanonicalMetric, ClosedForm, Variant,
    CHRISTOFFEL_FAMILIES,
};
use crate::geometry::{christoffel, ChartPoint, FdConfig, FiniteDifference};
use crate::harnack::{
    functionals, limit_second_ff_at, lott_match, rf_harnack_z, CoordinateBall, WeightedManifold,
};
use crate::track::{
    closed_form_second_ff, mcf_canonical_residual, stripped_second_ff, track_point_data,
    SecondFfForm, SpaceTimeTrack,
};
use crate::{Error, Result};

/// Catalog names, for listings.
pub fn background_names() -> &'static [&'static str] {
    &BACKGROUND_NAMES
}

pub fn mcf_names() -> &'static [&'static str] {
    &MCF_NAMES
}

/// Families of track second fundamental form entries (`i, j` spatial).
pub const SECOND_FF_FAMILIES: [&str; 3] = ["h^Σ_ij", "h^Σ_i0", "h^Σ_00"];

/// Runs one suite.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let bg = as_config(model_background(&config.background.name, &config.background.params))?;
    let mcf = match &config.mcf {
        Some(spec) => Some(as_config(model_mcf(&spec.name, &spec.params, &bg))?),
        None => None,
    };
    let ctx = Context { config, bg, mcf };
    match config.suite {
        Suite::RicciSolitonResidual => ctx.ricci_residual(),
        Suite::McfSolitonResidual => ctx.mcf_residual(),
        Suite::ChristoffelCrosscheck => ctx.crosscheck(),
        Suite::HarnackLimits => ctx.harnack_limits(),
        Suite::LottMatch => ctx.lott(),
        Suite::Functionals => ctx.functionals(),
    }
}

/// Model construction problems are configuration errors.
fn as_config<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })
}

/// One sample point.
struct Sample {
    index: usize,
    t: f64,
    coords: Vec<f64>,
}

/// Samples with their image in the background: `y = F_t(x)` when sampling on
/// a flow, `y = coords` otherwise.
struct Sampled {
    samples: Vec<Sample>,
    images: Vec<(f64, ChartPoint)>,
    t_min: Option<f64>,
    t_max: Option<f64>,
}

struct Context<'a> {
    config: &'a RunConfig,
    bg: CatalogBackground,
    mcf: Option<CatalogMcf>,
}

impl Context<'_> {
    fn flow(&self) -> Result<CatalogMcf> {
        self.config.require_mcf()?;
        Ok(self.mcf.clone().expect("flow is built whenever the config names one"))
    }

    fn tol(&self) -> &Tolerances {
        &self.config.tolerances
    }

    fn sample_on_background(&self) -> Result<Sampled> {
        let pts = self.config.sample.points(&self.bg.sample_box(), self.bg.horizon(), self.bg.horizon())?;
        Ok(self.finish_sample(pts, |_, y| Some(y.to_vec())))
    }

    fn sample_on_flow(&self, mcf: &CatalogMcf) -> Result<Sampled> {
        let limit = self.bg.horizon().min(mcf.horizon());
        // N·|Ě_N| only settles once N ≫ H², and H blows up at extinction
        let window = self.bg.horizon().min(0.5 * mcf.horizon());
        let pts = self.config.sample.points(&mcf.sample_box(), window, limit)?;
        Ok(self.finish_sample(pts, |t, x| {
            mcf.check_point(t, x).ok()?;
            Some(mcf.immersion(t, x))
        }))
    }

    fn finish_sample(
        &self,
        pts: Vec<(f64, Vec<f64>)>,
        image: impl Fn(f64, &[f64]) -> Option<Vec<f64>>,
    ) -> Sampled {
        let t_min = pts.iter().map(|p| p.0).reduce(f64::min);
        let t_max = pts.iter().map(|p| p.0).reduce(f64::max);
        let images = pts
            .iter()
            .filter_map(|(t, c)| Some((*t, ChartPoint::new(image(*t, c)?).ok()?)))
            .collect();
        let samples = pts
            .into_iter()
            .enumerate()
            .map(|(index, (t, coords))| Sample { index, t, coords })
            .collect();
        Sampled {
            samples,
            images,
            t_min,
            t_max,
        }
    }

    /// Canonical metrics for every `N`, after the admissibility check.
    fn canonical_metrics(&self, variant: Variant, s: &Sampled) -> Result<(Vec<CanonicalMetric<CatalogBackground>>, f64)> {
        let minimal = minimal_admissible_n(&self.bg, variant, &s.images);
        let cms = self
            .config
            .n_list
            .iter()
            .map(|&n| as_config(build_canonical_metric(self.bg.clone(), variant, n, &s.images)))
            .collect::<Result<Vec<_>>>()?;
        Ok((cms, minimal))
    }

    fn provenance(&self, variant: Option<Variant>, s: Option<&Sampled>, minimal: Option<f64>) -> Provenance {
        let c = self.config;
        Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            suite: c.suite,
            variant: variant.map(Variant::as_str),
            background: c.background.clone(),
            mcf: c.mcf.clone(),
            backend: c.backend.as_str(),
            closed_form: (c.suite == Suite::ChristoffelCrosscheck).then(|| match c.form {
                ClosedForm::Printed => "printed",
                ClosedForm::Derived => "derived",
            }),
            n_list: c.n_list.clone(),
            seed: c.sample.seed(),
            t_min: s.and_then(|s| s.t_min),
            t_max: s.and_then(|s| s.t_max),
            minimal_admissible_n: minimal,
            fd_steps: FdConfig::default(),
            tolerances: c.tolerances.clone(),
            conventions: CONVENTIONS,
        }
    }

    fn require_several_n(&self) -> Result<()> {
        if self.config.n_list.len() < 2 {
            return Err(Error::Config(format!(
                "suite {} needs at least two N values",
                self.config.suite.as_str()
            )));
        }
        Ok(())
    }

    fn ricci_residual(&self) -> Result<Report> {
        self.require_several_n()?;
        let variant = self.config.require_variant()?;
        let s = self.sample_on_background()?;
        let (cms, minimal) = self.canonical_metrics(variant, &s)?;
        let backend = self.config.backend;
        let records = per_sample(&s.samples, |p| {
            cms.iter()
                .map(|cm| {
                    let r = Record::new(p.index, p.t, &p.coords, Some(cm.n()), "E_N");
                    match ChartPoint::spacetime(p.t, &p.coords)
                        .and_then(|z| ricci_soliton_residual(cm, &z, backend))
                    {
                        Ok(rep) => r.value(rep.norm).scaled(rep.scaled),
                        Err(e) => r.failed(&e),
                    }
                })
                .collect()
        });
        let summary = self.decay_summary(&records, "E_N");
        Ok(Report {
            records,
            summary,
            provenance: self.provenance(Some(variant), Some(&s), Some(minimal)),
        })
    }

    fn mcf_residual(&self) -> Result<Report> {
        self.require_several_n()?;
        let variant = self.config.require_variant()?;
        let mcf = self.flow()?;
        let s = self.sample_on_flow(&mcf)?;
        let (cms, minimal) = self.canonical_metrics(variant, &s)?;
        let tracks = self.tracks(cms, &mcf, &s)?;
        let backend = self.config.backend;
        let records = per_sample(&s.samples, |p| {
            tracks
                .iter()
                .map(|tr| {
                    let n = tr.canonical().n();
                    let r = Record::new(p.index, p.t, &p.coords, Some(n), "Ě_N");
                    match ChartPoint::new(p.coords.clone())
                        .and_then(|x| track_point_data(tr, &x, p.t, backend))
                    {
                        Ok(d) => {
                            let rep = mcf_canonical_residual(variant, &d);
                            r.value(rep.norm).scaled(rep.scaled)
                        }
                        Err(e) => r.failed(&e),
                    }
                })
                .collect()
        });
        let summary = self.decay_summary(&records, "Ě_N");
        Ok(Report {
            records,
            summary,
            provenance: self.provenance(Some(variant), Some(&s), Some(minimal)),
        })
    }

    fn tracks(
        &self,
        cms: Vec<CanonicalMetric<CatalogBackground>>,
        mcf: &CatalogMcf,
        s: &Sampled,
    ) -> Result<Vec<SpaceTimeTrack<CatalogBackground, CatalogMcf>>> {
        cms.into_iter()
            .map(|cm| {
                let tr = as_config(SpaceTimeTrack::new(cm, mcf.clone()))?;
                Ok(tr.with_t_min(s.t_min.unwrap_or(0.0)))
            })
            .collect()
    }

    /// Sups per `N` and the max/min ratio of the `N`-scaled sups.
    fn decay_summary(&self, records: &[Record], quantity: &str) -> Summary {
        let tol = self.tol();
        let sups = sups_by_n(records, quantity, &self.config.n_list);
        let errors = count_point_errors(records);
        let usable = records.iter().filter(|r| r.error.is_none()).count();
        let mut checks = Vec::new();
        let mut notes = Vec::new();
        if usable > 0 {
            let scaled: Vec<f64> = sups.iter().filter_map(|e| e.scaled_sup).collect();
            let max = scaled.iter().copied().fold(0.0, f64::max);
            let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
            let raw = sups.iter().map(|e| e.sup).fold(0.0, f64::max);
            if raw <= tol.zero {
                // roundoff-level residuals are not scaled by N
                notes.push(format!("{quantity} vanishes to {:e} at every point", tol.zero));
                checks.push(Check::exact_zero(format!("sup |{quantity}|"), raw, tol.zero));
            } else {
                let name = format!("max/min of sup N·|{quantity}|");
                let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
                checks.push(Check::below(name, ratio, tol.ratio));
            }
        }
        Summary::from_checks(checks, sups, errors, usable, tol, notes)
    }

    fn crosscheck(&self) -> Result<Report> {
        let variant = self.config.require_variant()?;
        let s = match &self.mcf {
            Some(m) => self.sample_on_flow(m)?,
            None => self.sample_on_background()?,
        };
        let (cms, minimal) = self.canonical_metrics(variant, &s)?;
        let backend = self.config.backend;
        let form = self.config.form;
        let zero = self.tol().zero;
        let tracks = match &self.mcf {
            Some(m) => Some(self.tracks(cms.clone(), m, &s)?),
            None => None,
        };
        let track_form = match form {
            ClosedForm::Printed => SecondFfForm::Printed,
            ClosedForm::Derived => SecondFfForm::Derived,
        };
        let records = per_sample(&s.samples, |p| {
            let mut out = Vec::new();
            for (k, cm) in cms.iter().enumerate() {
                let n = Some(cm.n());
                let y = match &self.mcf {
                    Some(m) => {
                        m.check_point(p.t, &p.coords).map(|_| m.immersion(p.t, &p.coords))
                    }
                    None => Ok(p.coords.clone()),
                };
                let gammas = y.and_then(|y| {
                    let z = ChartPoint::spacetime(p.t, &y)?;
                    let engine = match backend {
                        crate::geometry::Backend::Analytic => christoffel(cm, &z)?,
                        crate::geometry::Backend::Fd => christoffel(&FiniteDifference(cm), &z)?,
                    };
                    let closed = canonical_christoffel_closed_form(cm, &z, form)?;
                    Ok((engine, closed))
                });
                match gammas {
                    Ok((engine, closed)) => {
                        let m = engine.dim();
                        let mut entries = vec![Vec::new(); CHRISTOFFEL_FAMILIES.len()];
                        for a in 0..m {
                            for b in 0..m {
                                for c in 0..m {
                                    entries[christoffel_family(a, b, c)]
                                        .push((engine.get(a, b, c), closed.get(a, b, c)));
                                }
                            }
                        }
                        for (fam, err) in family_errors(&entries, zero).into_iter().enumerate() {
                            out.push(
                                Record::new(p.index, p.t, &p.coords, n, CHRISTOFFEL_FAMILIES[fam])
                                    .value(err),
                            );
                        }
                    }
                    Err(e) => {
                        for fam in CHRISTOFFEL_FAMILIES {
                            out.push(Record::new(p.index, p.t, &p.coords, n, fam).failed(&e));
                        }
                    }
                }
                let Some(tracks) = &tracks else { continue };
                let data = ChartPoint::new(p.coords.clone())
                    .and_then(|x| track_point_data(&tracks[k], &x, p.t, backend));
                match data {
                    Ok(d) => {
                        let engine = d.second_ff();
                        let closed = closed_form_second_ff(variant, track_form, &d);
                        let dim = engine.nrows();
                        let mut entries = vec![Vec::new(); SECOND_FF_FAMILIES.len()];
                        for i in 0..dim {
                            for j in 0..dim {
                                let fam = match (i == 0) as u8 + (j == 0) as u8 {
                                    0 => 0,
                                    1 => 1,
                                    _ => 2,
                                };
                                entries[fam].push((engine[(i, j)], closed[(i, j)]));
                            }
                        }
                        for (fam, err) in family_errors(&entries, zero).into_iter().enumerate() {
                            out.push(
                                Record::new(p.index, p.t, &p.coords, n, SECOND_FF_FAMILIES[fam])
                                    .value(err),
                            );
                        }
                    }
                    Err(e) => {
                        for fam in SECOND_FF_FAMILIES {
                            out.push(Record::new(p.index, p.t, &p.coords, n, fam).failed(&e));
                        }
                    }
                }
            }
            out
        });

        let tol = self.tol();
        let limit = tol.crosscheck_for(backend);
        let errors = count_point_errors(&records);
        let usable = records.iter().filter(|r| r.error.is_none()).count();
        let families = CHRISTOFFEL_FAMILIES
            .iter()
            .chain(if self.mcf.is_some() { &SECOND_FF_FAMILIES[..] } else { &[] });
        let mut checks = Vec::new();
        let mut sups = Vec::new();
        for fam in families {
            let worst = records
                .iter()
                .filter(|r| r.quantity == *fam)
                .filter_map(|r| r.value)
                .fold(0.0, f64::max);
            checks.push(Check::below(format!("max relative error {fam}"), worst, limit));
            sups.extend(sups_by_n(&records, fam, &self.config.n_list));
        }
        let summary = Summary::from_checks(checks, sups, errors, usable, tol, Vec::new());
        Ok(Report {
            records,
            summary,
            provenance: self.provenance(Some(variant), Some(&s), Some(minimal)),
        })
    }

    fn harnack_limits(&self) -> Result<Report> {
        self.require_several_n()?;
        let variant = self.config.require_variant()?;
        if variant != Variant::Expanding {
            return Err(Error::Config("harnack_limits needs the expanding variant".into()));
        }
        let s = match &self.mcf {
            Some(m) => self.sample_on_flow(m)?,
            None => self.sample_on_background()?,
        };
        let (cms, minimal) = self.canonical_metrics(variant, &s)?;
        let tracks = match &self.mcf {
            Some(m) => Some(self.tracks(cms.clone(), m, &s)?),
            None => None,
        };
        let backend = self.config.backend;
        let m = self.bg.dim();
        let seed = self.config.sample.seed().unwrap_or(0);
        // directions are drawn up front so that they do not depend on scheduling
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let directions: Vec<(DVector<f64>, DVector<f64>)> = s
            .samples
            .iter()
            .map(|_| {
                let x = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
                let v = DVector::from_fn(m - 1, |_, _| rng.random_range(-1.0..1.0));
                (x, v)
            })
            .collect();

        let records = per_sample(&s.samples, |p| {
            let (xdir, vdir) = &directions[p.index];
            let y = match &self.mcf {
                Some(mcf) => mcf.check_point(p.t, &p.coords).map(|_| mcf.immersion(p.t, &p.coords)),
                None => Ok(p.coords.clone()),
            };
            let mut out = Vec::new();
            let z = y.and_then(|y| {
                let yp = ChartPoint::new(y.clone())?;
                let z = rf_harnack_z(&self.bg, xdir, &yp, p.t)?;
                Ok((y, z))
            });
            match z {
                Ok((y, zval)) => {
                    out.push(Record::new(p.index, p.t, &p.coords, None, "Z").value(zval));
                    for cm in &cms {
                        let r = Record::new(p.index, p.t, &p.coords, Some(cm.n()), "|Ric(X̄,X̄) − Z|");
                        out.push(
                            match ChartPoint::spacetime(p.t, &y)
                                .and_then(|q| lifted_ricci(cm, xdir, &q, backend))
                            {
                                Ok(v) => r.value((v - zval).abs()),
                                Err(e) => r.failed(&e),
                            },
                        );
                    }
                }
                Err(e) => {
                    out.push(Record::new(p.index, p.t, &p.coords, None, "Z").failed(&e));
                }
            }
            let Some(tracks) = &tracks else { return out };
            for tr in tracks {
                let r = Record::new(p.index, p.t, &p.coords, Some(tr.canonical().n()), "|tσh^Σ − limit|");
                let gap = ChartPoint::new(p.coords.clone())
                    .and_then(|x| track_point_data(tr, &x, p.t, backend))
                    .and_then(|d| {
                        let h = stripped_second_ff(variant, &d, vdir)?;
                        let lim = limit_second_ff_at(&d.slice, vdir)?;
                        Ok((h - lim).abs())
                    });
                out.push(match gap {
                    Ok(g) => r.value(g),
                    Err(e) => r.failed(&e),
                });
            }
            out
        });

        let tol = self.tol();
        let errors = count_point_errors(&records);
        let usable = records.iter().filter(|r| r.error.is_none()).count();
        let mut checks = Vec::new();
        let mut sups = Vec::new();
        let mut notes = Vec::new();
        let mut quantities = vec!["|Ric(X̄,X̄) − Z|"];
        if self.mcf.is_some() {
            quantities.push("|tσh^Σ − limit|");
        }
        for q in quantities {
            sups.extend(sups_by_n(&records, q, &self.config.n_list));
            checks.extend(self.halving_checks(&records, q, s.samples.len(), &mut notes));
        }
        let summary = Summary::from_checks(checks, sups, errors, usable, tol, notes);
        Ok(Report {
            records,
            summary,
            provenance: self.provenance(Some(variant), Some(&s), Some(minimal)),
        })
    }

    /// Per-point ratios `gap(N_{k+1}) / gap(N_k)`, normalised to a doubling
    /// of `N`.
    fn halving_checks(&self, records: &[Record], quantity: &str, points: usize, notes: &mut Vec<String>) -> Vec<Check> {
        let tol = self.tol();
        let n_list = &self.config.n_list;
        let mut gaps = vec![vec![None; n_list.len()]; points];
        for r in records.iter().filter(|r| r.quantity == quantity) {
            if let (Some(v), Some(n)) = (r.value, r.n) {
                if let Some(k) = n_list.iter().position(|&m| m == n) {
                    gaps[r.index][k] = Some(v);
                }
            }
        }
        let mut ratios = Vec::new();
        let mut vanishing = 0;
        for row in &gaps {
            for k in 0..n_list.len() - 1 {
                let (Some(g0), Some(g1)) = (row[k], row[k + 1]) else { continue };
                if g0 <= tol.zero && g1 <= tol.zero {
                    vanishing += 1;
                    continue;
                }
                let scale = n_list[k + 1] / n_list[k] / 2.0;
                ratios.push(if g0 > 0.0 { g1 / g0 * scale } else { f64::INFINITY });
            }
        }
        if vanishing > 0 {
            notes.push(format!("{quantity}: {vanishing} pairs vanish identically"));
        }
        let [lo, hi] = tol.halving;
        if ratios.is_empty() {
            if vanishing == 0 {
                return Vec::new();
            }
            return vec![Check::exact_zero(format!("{quantity} vanishes"), 0.0, tol.zero)];
        }
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(0.0, f64::max);
        vec![
            Check::within(format!("min halving ratio {quantity}"), min, lo, hi),
            Check::within(format!("max halving ratio {quantity}"), max, lo, hi),
        ]
    }

    fn lott(&self) -> Result<Report> {
        let mcf = self.flow()?;
        if self.bg.direction() != crate::backgrounds::FlowDirection::Forward {
            return Err(Error::Config("lott_match needs a forward background".into()));
        }
        let s = self.sample_on_flow(&mcf)?;
        let seed = self.config.sample.seed().unwrap_or(0);
        let dim = self.bg.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let potentials: Vec<_> = s
            .samples
            .iter()
            .map(|_| crate::backgrounds::Potential::random_polynomial(dim, self.config.degree, &mut rng))
            .collect();
        let records = per_sample(&s.samples, |p| {
            let f = potentials[p.index].at(dim, p.t);
            let r = Record::new(p.index, p.t, &p.coords, None, "lott_defect");
            vec![match ChartPoint::new(p.coords.clone())
                .and_then(|x| lott_match(&self.bg, &mcf, &f, &x, p.t))
            {
                Ok(m) => r.value(m.defect),
                Err(e) => r.failed(&e),
            }]
        });
        let tol = self.tol();
        let errors = count_point_errors(&records);
        let usable = records.iter().filter(|r| r.error.is_none()).count();
        let worst = records.iter().filter_map(|r| r.value).map(f64::abs).fold(0.0, f64::max);
        let checks = if usable > 0 {
            vec![Check::below("max |lott defect|", worst, tol.matching)]
        } else {
            Vec::new()
        };
        let summary = Summary::from_checks(checks, Vec::new(), errors, usable, tol, Vec::new());
        Ok(Report {
            records,
            summary,
            provenance: self.provenance(None, Some(&s), None),
        })
    }

    fn functionals(&self) -> Result<Report> {
        let spec = &self.config.functional;
        let dim = self.bg.dim();
        as_config(spec.potential.validate(dim))?;
        let center = match &spec.center {
            Some(c) if c.len() != dim => {
                return Err(Error::Config(format!("ball center needs {dim} coordinates")))
            }
            Some(c) => DVector::from_column_slice(c),
            None => DVector::zeros(dim),
        };
        let ball = as_config(CoordinateBall::new(center, spec.radius))?;
        if !(spec.t > 0.0 && spec.t <= self.bg.horizon()) {
            return Err(Error::Config(format!("functional time {} is outside (0, {}]", spec.t, self.bg.horizon())));
        }
        let snapshot = Snapshot::new(&self.bg, spec.t);
        let f = spec.potential.at(dim, spec.t);
        let wm = WeightedManifold {
            metric: &snapshot,
            potential: &f,
            ball,
        };
        let grids = [spec.grid, spec.grid.refined()];
        let mut records = Vec::new();
        let mut values = Vec::new();
        for (index, grid) in grids.iter().enumerate() {
            let point = [grid.radial as f64, grid.polar as f64];
            match functionals(&wm, *grid) {
                Ok(v) => {
                    for (q, x) in [
                        ("weighted_volume", v.weighted_volume),
                        ("weighted_boundary", v.weighted_boundary),
                        ("i_infty", v.i_infty),
                        ("ghy_volume", v.ghy_volume),
                        ("ghy_boundary", v.ghy_boundary),
                        ("i_ghy", v.i_ghy),
                    ] {
                        records.push(Record::new(index, spec.t, &point, None, q).value(x));
                    }
                    values.push(Some(v));
                }
                Err(e) => {
                    records.push(Record::new(index, spec.t, &point, None, "i_infty").failed(&e));
                    values.push(None);
                }
            }
        }
        let tol = self.tol();
        let errors = count_point_errors(&records);
        let mut checks = Vec::new();
        let mut notes = vec![format!(
            "grid points are (radial, polar) panel counts; the refined grid doubles both"
        )];
        if let [Some(a), Some(b)] = &values[..] {
            checks.push(Check::below(
                "I_∞ change under refinement",
                relative(b.i_infty, a.i_infty, tol.zero),
                tol.refinement,
            ));
            checks.push(Check::below(
                "I_GHY change under refinement",
                relative(b.i_ghy, a.i_ghy, tol.zero),
                tol.refinement,
            ));
            if let Some(expected) = spec.expected {
                checks.push(Check::below(
                    "I_∞ against expected",
                    relative(b.i_infty, expected, tol.zero),
                    tol.refinement,
                ));
            }
        } else {
            notes.push("quadrature failed on at least one grid".into());
        }
        let usable = values.iter().flatten().count();
        let summary = Summary::from_checks(checks, Vec::new(), errors, usable, tol, notes);
        Ok(Report {
            records,
            summary,
            provenance: self.provenance(None, None, None),
        })
    }
}

/// Evaluates samples in parallel and concatenates their records in sample
/// order.
fn per_sample<F>(samples: &[Sample], f: F) -> Vec<Record>
where
    F: Fn(&Sample) -> Vec<Record> + Sync + Send,
{
    samples.par_iter().map(f).collect::<Vec<_>>().into_iter().flatten().collect()
}

/// Number of sample points with at least one failed record.
fn count_point_errors(records: &[Record]) -> usize {
    let mut idx: Vec<usize> = records.iter().filter(|r| r.error.is_some()).map(|r| r.index).collect();
    idx.dedup();
    idx.len()
}

fn sups_by_n(records: &[Record], quantity: &str, n_list: &[f64]) -> Vec<SupEntry> {
    n_list
        .iter()
        .filter_map(|&n| {
            let hits: Vec<&Record> = records
                .iter()
                .filter(|r| r.quantity == quantity && r.n == Some(n) && r.value.is_some())
                .collect();
            if hits.is_empty() {
                return None;
            }
            let sup = hits.iter().filter_map(|r| r.value).map(f64::abs).fold(0.0, f64::max);
            let scaled: Vec<f64> = hits.iter().filter_map(|r| r.scaled).collect();
            Some(SupEntry {
                n,
                quantity: quantity.to_string(),
                sup,
                scaled_sup: (!scaled.is_empty()).then(|| scaled.iter().copied().fold(0.0, f64::max)),
            })
        })
        .collect()
}

/// `|x − y| / max(|x|, |y|, floor)`, zero when the difference is below
/// `zero`.
pub fn relative_error(x: f64, y: f64, floor: f64, zero: f64) -> f64 {
    let d = (x - y).abs();
    if d < zero {
        0.0
    } else {
        d / x.abs().max(y.abs()).max(floor)
    }
}

fn relative(x: f64, y: f64, zero: f64) -> f64 {
    relative_error(x, y, 0.0, zero)
}

/// Max error per family of `(engine, closed form)` pairs, relative to the
/// largest entry of the family. Entrywise ratios are useless near polar
/// chart singularities, where `g⁻¹` amplifies roundoff in entries that
/// vanish.
fn family_errors(entries: &[Vec<(f64, f64)>], zero: f64) -> Vec<f64> {
    entries
        .iter()
        .map(|v| {
            let scale = v.iter().map(|&(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max);
            v.iter()
                .map(|&(a, b)| relative_error(a, b, scale, zero))
                .fold(0.0, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests;
