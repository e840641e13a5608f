//! One function per command; each writes its artifacts under the output directory.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use resurgo::algebra::quad::QuadConfig;
use resurgo::algebra::BigComplex;
use resurgo::borel::{detect_singularities, pade_robust, pole_rows, BorelSingularity, SingularityKind, StabilityConfig};
use resurgo::perturbative::{borel_germ, expand_perturbative, singular_set, BorelGerm, ODESpec, PerturbativeSeries, PhysicalSingularSet};
use resurgo::singulant::{singulant_branch, trace_stokes_lines, ComplexPath, Rect, SingulantBranch, SingulantEquation, TraceConfig};
use resurgo::transseries::{borel_coefficients, build_component, first_order_closed_form, BuildConfig, TransSeriesComponent};
use resurgo::validation::{measure_jump, Crossing, JumpConfig, JumpMeasurement, ValidationError};
use serde_json::{json, Value};

use crate::config::{Command, Mode, RunConfig};
use crate::spec_file::SpecFile;
use crate::CliError;

/// Files written by a run, warnings, and the exit code it ends with.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub code: i32,
}

pub struct Pipeline {
    pub cfg: RunConfig,
    pub spec: ODESpec,
    pub spec_file: SpecFile,
    out: Outcome,
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn complex_json(z: &BigComplex) -> Value {
    serde_json::to_value(z).expect("complex serializes")
}

impl Pipeline {
    pub fn new(cfg: RunConfig, spec: ODESpec, spec_file: SpecFile) -> Self {
        Pipeline { cfg, spec, spec_file, out: Outcome::default() }
    }

    pub fn run(mut self) -> Result<Outcome, CliError> {
        fs::create_dir_all(&self.cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", self.cfg.out.display())))?;
        match self.cfg.command {
            Command::Expand => self.expand()?,
            Command::Germ => self.germ()?,
            Command::Pade => self.pade()?,
            Command::Singulant => self.singulant()?,
            Command::Stokes => self.stokes()?,
            Command::Transseries => self.transseries()?,
            Command::Jump => self.jump()?,
            Command::Validate => self.validate()?,
        }
        Ok(self.out)
    }

    fn prec(&self) -> u32 {
        self.cfg.precision
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.cfg.out.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.out.files.push(path);
        Ok(())
    }

    /// Writes `{schema, run_config, spec, ...body}`.
    fn write_json(&mut self, name: &str, body: Value) -> Result<(), CliError> {
        let mut doc = json!({
            "schema": resurgo::SCHEMA,
            "run_config": self.cfg.to_json(),
            "spec": serde_json::to_value(&self.spec_file).expect("spec serializes"),
        });
        if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
            d.extend(b);
        }
        let text = serde_json::to_string_pretty(&doc).expect("json serializes");
        self.write(name, &text)
    }

    /// Writes a CSV with a leading comment line holding the run config.
    fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "# run-config: {}", self.cfg.to_json()).expect("in-memory write");
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
            for r in rows {
                w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        self.write(name, &String::from_utf8(buf).expect("csv is utf-8"))
    }

    fn series(&self) -> Result<PerturbativeSeries, CliError> {
        expand_perturbative(&self.spec, self.cfg.terms).map_err(numerical)
    }

    fn probes(&self) -> Result<Vec<BigComplex>, CliError> {
        let z = self.cfg.probes()?;
        if z.is_empty() && self.cfg.command != Command::Expand && self.cfg.command != Command::Stokes {
            return Err(CliError::Parse(format!("{:?} needs at least one --z probe", self.cfg.command).to_lowercase()));
        }
        Ok(z)
    }

    fn epsilons(&self) -> Result<Vec<BigComplex>, CliError> {
        let e = self.cfg.epsilons()?;
        if e.is_empty() {
            return Err(CliError::Parse("--eps is required".into()));
        }
        if e.iter().any(|x| x.is_zero()) {
            return Err(CliError::Parse("--eps values must be nonzero".into()));
        }
        Ok(e)
    }

    fn singular(&self, series: &PerturbativeSeries) -> Result<PhysicalSingularSet, CliError> {
        singular_set(series, Some(&self.spec), self.prec()).map_err(numerical)
    }

    /// The germ at `z`, refusing points of the boundary-layer set.
    fn germ_at(&self, series: &PerturbativeSeries, set: &PhysicalSingularSet, z: &BigComplex) -> Result<BorelGerm, CliError> {
        if let Some(p) = set.nearest(z) {
            if p.z.dist_f64(z) <= 1e-12 * z.abs_f64().max(1.0) {
                return Err(CliError::Numerical(format!(
                    "z = {} lies on the boundary-layer set Γ_z ({:?} at {}); the Borel germ is undefined there",
                    z.to_string_digits(12),
                    p.source,
                    p.z.to_string_digits(12)
                )));
            }
        }
        borel_germ(series, z).map_err(numerical)
    }

    fn expand(&mut self) -> Result<(), CliError> {
        let series = self.series()?;
        let probes = self.probes()?;
        let terms: Vec<Value> = if series.is_empty() {
            Vec::new()
        } else {
            series
                .terms
                .iter()
                .enumerate()
                .map(|(n, t)| {
                    let samples: Vec<Value> = probes
                        .iter()
                        .map(|z| json!({ "z": complex_json(z), "value": t.eval_complex(z).ok().map(|v| complex_json(&v)) }))
                        .collect();
                    json!({ "n": n, "exact": t.to_string(), "samples": samples })
                })
                .collect()
        };
        self.write_json("series.json", json!({ "terms": terms }))
    }

    fn germ(&mut self) -> Result<(), CliError> {
        let series = self.series()?;
        let set = self.singular(&series)?;
        for (k, z) in self.probes()?.iter().enumerate() {
            let germ = self.germ_at(&series, &set, z)?;
            self.write_json(&format!("germ_{k}.json"), json!({ "germ": germ }))?;
        }
        Ok(())
    }

    fn pade_at(&self, germ: &BorelGerm) -> Result<(resurgo::borel::PadeApproximant, Vec<BorelSingularity>), CliError> {
        let (l, m) = self.cfg.pade;
        if germ.coeffs.len() < l + m + 5 {
            return Err(CliError::Parse(format!("[{l}:{m}] Padé needs at least {} terms; raise --terms", l + m + 5)));
        }
        let p = pade_robust(&germ.coeffs, l, m).map_err(numerical)?;
        let check = pade_robust(&germ.coeffs, l + 2, m + 2).map_err(numerical)?;
        let found = detect_singularities(&p, &check, &StabilityConfig::default());
        Ok((p, found))
    }

    fn pade(&mut self) -> Result<(), CliError> {
        let series = self.series()?;
        let set = self.singular(&series)?;
        for (k, z) in self.probes()?.iter().enumerate() {
            let germ = self.germ_at(&series, &set, z)?;
            let (p, found) = self.pade_at(&germ)?;
            let rows: Vec<Vec<String>> = pole_rows(&p, &found)
                .iter()
                .map(|r| vec![format!("{:e}", r.re), format!("{:e}", r.im), format!("{:e}", r.residue_abs), r.classification.into()])
                .collect();
            self.write_csv(&format!("pade_{k}.csv"), &["re_w", "im_w", "abs_residue", "classification"], &rows)?;
            self.write_json(&format!("singularities_{k}.json"), json!({ "z": complex_json(z), "pade": [p.l, p.m], "singularities": found, "poles": p.poles }))?;
        }
        Ok(())
    }

    /// Branches of χ vanishing at a boundary-layer point and continued to `end`.
    fn branches_to(&mut self, eq: &SingulantEquation, set: &PhysicalSingularSet, end: &BigComplex) -> Vec<SingulantBranch> {
        let prec = self.prec();
        let zero = BigComplex::zero(prec);
        let quad = QuadConfig::for_precision(prec);
        let mut out = Vec::new();
        for p in &set.points {
            if p.z.dist_f64(end) == 0.0 {
                continue;
            }
            let path = ComplexPath::segment(&p.z, end, 4);
            let roots = match eq.roots_at(&path.samples[1]) {
                Ok(r) => r,
                Err(e) => {
                    self.out.warnings.push(format!("no χ′ roots near {}: {e}", p.z.to_string_digits(8)));
                    continue;
                }
            };
            for r in roots {
                match singulant_branch(eq, &path, &r, &zero, &quad) {
                    Ok(mut b) => {
                        b.id = out.len();
                        out.push(b);
                    }
                    Err(e) => self.out.warnings.push(format!("branch from {} skipped: {e}", p.z.to_string_digits(8))),
                }
            }
        }
        out
    }

    fn singulant(&mut self) -> Result<(), CliError> {
        let series = self.series()?;
        let set = self.singular(&series)?;
        let eq = SingulantEquation::from_spec(&self.spec);
        let mut probes = Vec::new();
        for z in self.probes()? {
            let branches = self.branches_to(&eq, &set, &z);
            let summary: Vec<Value> = branches
                .iter()
                .map(|b| {
                    json!({
                        "branch": b.id,
                        "z_star": complex_json(&b.z_star),
                        "chi": complex_json(b.chi_end()),
                        "chi_prime": complex_json(b.chiprime.last().unwrap()),
                        "gamma": b.gamma,
                        "error": b.error,
                        "path": b,
                    })
                })
                .collect();
            probes.push(json!({ "z": complex_json(&z), "branches": summary }));
        }
        self.write_json("singulant.json", json!({ "equation": eq.to_string(), "boundary_layer": set, "probes": probes }))
    }

    fn stokes(&mut self) -> Result<(), CliError> {
        let prec = self.prec();
        let series = self.series()?;
        let set = self.singular(&series)?;
        let eq = SingulantEquation::from_spec(&self.spec);
        let [x0, y0, x1, y1] = self.cfg.domain;
        let mut tcfg = TraceConfig::new(Rect { re_min: x0, re_max: x1, im_min: y0, im_max: y1 }, prec);
        tcfg.singular = set.points.iter().map(|p| p.z.clone()).collect();
        let mut lines = Vec::new();
        let mut branch = 0;
        for p in &set.points {
            // short seeding path away from the other singular points
            let gap = set.points.iter().filter(|q| q.z.dist_f64(&p.z) > 0.0).map(|q| q.z.dist_f64(&p.z)).fold(f64::INFINITY, f64::min);
            let r = 0.5f64.min(0.4 * gap);
            let end = &p.z + &BigComplex::from_f64(r * 0.6, r * 0.8, prec);
            let mut found = self.branches_to(&eq, &PhysicalSingularSet { points: vec![p.clone()] }, &end);
            for b in found.iter_mut() {
                b.id = branch;
                branch += 1;
                match trace_stokes_lines(&eq, b, &tcfg) {
                    Ok(ls) => lines.extend(ls),
                    Err(e) => self.out.warnings.push(format!("tracing from {} failed: {e}", p.z.to_string_digits(8))),
                }
            }
        }
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for (k, l) in lines.iter().enumerate() {
            for (z, chi) in l.points.iter().zip(&l.chi) {
                let (zr, zi) = z.to_f64();
                let (cr, ci) = chi.to_f64();
                rows.push(vec![k.to_string(), l.branch.to_string(), format!("{zr:e}"), format!("{zi:e}"), format!("{cr:e}"), format!("{ci:e}")]);
            }
            let poly: Vec<[f64; 2]> = l.points.iter().map(|z| z.to_f64().into()).collect();
            records.push(json!({ "line": k, "branch": l.branch, "z_star": complex_json(&l.z_star), "status": l.status, "polyline": poly }));
        }
        self.write_csv("stokes.csv", &["line", "branch", "re_z", "im_z", "re_chi", "im_chi"], &rows)?;
        self.write_json("stokes.json", json!({ "lines": records }))
    }

    /// Components built on every branch reaching `z`, with `χ′(z)`.
    fn components(&mut self, series: &PerturbativeSeries, set: &PhysicalSingularSet, z: &BigComplex) -> Vec<(TransSeriesComponent, BigComplex)> {
        let eq = SingulantEquation::from_spec(&self.spec);
        let bcfg = BuildConfig::new(self.prec());
        let mut out = Vec::new();
        for b in self.branches_to(&eq, set, z) {
            match build_component(&self.spec, series, &b, &bcfg) {
                Ok(c) => out.push((c, b.chiprime.last().unwrap().clone())),
                Err(e) => self.out.warnings.push(format!("branch {} from {}: no component ({e})", b.id, b.z_star.to_string_digits(8))),
            }
        }
        out
    }

    /// Germ of the closed-form Borel transform of a first-order equation,
    /// compared with the perturbative germ.
    fn closed_form(&self, series: &PerturbativeSeries, z: &BigComplex, comps: &[TransSeriesComponent]) -> Option<Value> {
        let s = &self.spec;
        let forced_at_one = s.forcing.iter().enumerate().all(|(k, f)| k == 1 || f.is_zero());
        if s.order() != 1 || !forced_at_one {
            return None;
        }
        let lead = &s.coeffs[1];
        let g = s.coeffs[0].checked_div(lead).ok()?;
        let h = s.forcing_at(1).checked_div(lead).ok()?;
        let nearest = comps.iter().map(|c| c.chi.last().unwrap().abs_f64()).filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
        // small enough that trapezoid aliasing is far below the comparison
        let radius = if nearest.is_finite() { 0.25 * nearest } else { 0.25 };
        let prec = self.prec();
        let quad = QuadConfig::for_precision(prec);
        let n = 20.min(series.len().saturating_sub(1));
        let closed = borel_coefficients(
            |w| first_order_closed_form(|x: &BigComplex| g.eval_complex(x), |x: &BigComplex| h.eval_complex(x), w, z, &quad),
            radius,
            n,
            64,
            prec,
        )
        .ok()?;
        let germ = borel_germ(series, z).ok()?;
        let diff = closed.iter().zip(&germ.coeffs).map(|(a, b)| a.dist_f64(b) / b.abs_f64().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        Some(json!({ "g": g.to_string(), "h": h.to_string(), "coefficients": closed, "max_relative_difference": diff }))
    }

    fn transseries(&mut self) -> Result<(), CliError> {
        let series = self.series()?;
        let set = self.singular(&series)?;
        let mut probes = Vec::new();
        for z in self.probes()? {
            let comps: Vec<TransSeriesComponent> = self.components(&series, &set, &z).into_iter().map(|c| c.0).collect();
            let closed = self.closed_form(&series, &z, &comps);
            probes.push(json!({ "z": complex_json(&z), "components": comps, "closed_form": closed }));
        }
        self.write_json("transseries.json", json!({ "probes": probes }))
    }

    /// Prediction order: every track whose coefficients the recurrence fixes.
    fn order_of(c: &TransSeriesComponent) -> usize {
        c.tracks.len().min(c.unconstrained_from.unwrap_or(usize::MAX)).max(1) - 1
    }

    fn on_stokes_line(c: &TransSeriesComponent) -> bool {
        let chi = c.chi.last().unwrap();
        let (re, im) = chi.to_f64();
        re > 0.0 && im.abs() <= 1e-8 * chi.abs_f64()
    }

    fn jump(&mut self) -> Result<(), CliError> {
        let series = self.series()?;
        let set = self.singular(&series)?;
        let eps = self.epsilons()?;
        let mut records = Vec::new();
        for z in self.probes()? {
            for (c, _) in self.components(&series, &set, &z) {
                for e in &eps {
                    let order = Self::order_of(&c);
                    let j = c.stokes_jump(&z, e, order).map_err(numerical)?;
                    records.push(json!({
                        "z": complex_json(&z),
                        "epsilon": complex_json(e),
                        "branch": c.branch,
                        "z_star": complex_json(&c.z_star),
                        "chi": complex_json(c.chi.last().unwrap()),
                        "on_stokes_line": Self::on_stokes_line(&c),
                        "order": order,
                        "jump": complex_json(&j),
                        "abs_jump": j.abs_f64(),
                    }));
                }
            }
        }
        self.write_json("jump.json", json!({ "jumps": records }))
    }

    /// Predicted ray-crossing jump `Σ 2πi·residue·e^(−χ/ε)` over the simple
    /// isolated poles between the rays.
    fn ray_prediction(&self, found: &[BorelSingularity], eps: &BigComplex, lo: f64, hi: f64) -> Result<BigComplex, CliError> {
        let prec = self.prec();
        let mut sum = BigComplex::zero(prec);
        let mid = (lo + hi) / 2.0;
        for s in found {
            let ang = s.chi.arg().to_f64();
            let d = (ang - mid + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            if d.abs() >= (hi - lo) / 2.0 {
                continue;
            }
            let pole = s.support.iter().find(|p| p.multiplicity == 1 && s.kind == SingularityKind::IsolatedPole);
            match pole {
                Some(p) => sum += &(&BigComplex::two_pi_i(prec) * &p.residue) * &(-(&s.chi / eps)).exp(),
                None => return Err(CliError::Numerical(format!("singularity at {} between the rays is not a simple pole", s.chi.to_string_digits(10)))),
            }
        }
        Ok(sum)
    }

    fn validate(&mut self) -> Result<(), CliError> {
        let prec = self.prec();
        let series = self.series()?;
        let set = self.singular(&series)?;
        let eps_list = self.epsilons()?;
        let mut jcfg = JumpConfig::for_precision(prec);
        jcfg.terms = self.cfg.terms;
        let mut records = Vec::new();
        let (mut mismatch, mut noisy) = (false, false);
        for z in self.probes()? {
            let on_line: Vec<(TransSeriesComponent, BigComplex)> = match self.cfg.mode {
                Mode::Rays => Vec::new(),
                _ => self.components(&series, &set, &z).into_iter().filter(|c| Self::on_stokes_line(&c.0)).collect(),
            };
            let continuation = match self.cfg.mode {
                Mode::Continuation => true,
                Mode::Rays => false,
                Mode::Auto => !on_line.is_empty(),
            };
            if continuation && on_line.is_empty() {
                return Err(CliError::Numerical(format!("no trans-series component has a Stokes line through {}", z.to_string_digits(10))));
            }
            let rays = if continuation { None } else { Some(self.pade_at(&self.germ_at(&series, &set, &z)?)?) };
            for eps in &eps_list {
                let (predicted, crossing) = if continuation {
                    let mut sum = BigComplex::zero(prec);
                    for (c, _) in &on_line {
                        sum += &c.stokes_jump(&z, eps, Self::order_of(c)).map_err(numerical)?;
                    }
                    // start points on either side, along the normal to the line
                    let cp = &on_line[0].1;
                    let t = cp.conj().scale_f64(1.0 / cp.abs_f64());
                    let n = t.mul_i().scale_f64(self.cfg.offset);
                    (sum, Crossing::Continuation { minus: &z - &n, plus: &z + &n })
                } else {
                    let (_, found) = rays.as_ref().unwrap();
                    let mid = eps.arg().to_f64();
                    let (lo, hi) = (mid - self.cfg.spread, mid + self.cfg.spread);
                    (self.ray_prediction(found, eps, lo, hi)?, Crossing::Rays { minus: lo, plus: hi })
                };
                let base = json!({
                    "z": complex_json(&z),
                    "epsilon": complex_json(eps),
                    "mode": if continuation { "continuation" } else { "rays" },
                    "predicted": complex_json(&predicted),
                });
                let rec = match measure_jump(&self.spec, eps, &z, &crossing, &jcfg) {
                    Ok(m) => {
                        let rel = Self::relative_error(&m, &predicted);
                        let pass = rel <= self.cfg.tol;
                        mismatch |= !pass;
                        json!({ "measured": m, "relative_error": rel, "status": if pass { "pass" } else { "mismatch" } })
                    }
                    Err(ValidationError::NoiseFloor { measured, noise }) => {
                        noisy = true;
                        self.out.warnings.push(format!(
                            "ε = {}: measured jump {measured:e} is within the noise floor {noise:e}; raise ε or the precision",
                            eps.to_string_digits(8)
                        ));
                        json!({ "measured_abs": measured, "noise": noise, "status": "noise-floor" })
                    }
                    Err(e) => return Err(numerical(e)),
                };
                let mut full = base;
                full.as_object_mut().unwrap().extend(rec.as_object().unwrap().clone());
                records.push(full);
            }
        }
        let passed = !mismatch && !noisy;
        self.write_json("validate.json", json!({ "tolerance": self.cfg.tol, "passed": passed, "results": records }))?;
        self.out.code = if mismatch {
            4
        } else if noisy {
            3
        } else {
            0
        };
        Ok(())
    }

    /// Magnitudes are compared: the crossing orientation fixes only the sign.
    fn relative_error(m: &JumpMeasurement, predicted: &BigComplex) -> f64 {
        let p = predicted.abs_f64();
        if p == 0.0 {
            return f64::INFINITY;
        }
        (m.value.abs_f64() - p).abs() / p
    }
}

/// Reads the spec file and runs the configured command.
pub fn run(args: &crate::config::Args) -> Result<Outcome, CliError> {
    let src = fs::read_to_string(&args.spec).map_err(|e| CliError::Parse(format!("{}: {e}", args.spec.display())))?;
    let file = SpecFile::parse(&src).map_err(|e| CliError::Parse(format!("{}: {e}", args.spec.display())))?;
    let spec = file.to_spec(&src).map_err(|e| CliError::Parse(format!("{}: {e}", args.spec.display())))?;
    let cfg = RunConfig::resolve(args, file.precision_bits, file.series_order)?;
    let canonical = SpecFile::from_spec(&spec, file.precision_bits, file.series_order);
    Pipeline::new(cfg, spec, canonical).run()
}

pub fn parse_spec(src: &str) -> Result<ODESpec, CliError> {
    let file = SpecFile::parse(src).map_err(|e| CliError::Parse(e.to_string()))?;
    file.to_spec(src).map_err(|e| CliError::Parse(e.to_string()))
}
