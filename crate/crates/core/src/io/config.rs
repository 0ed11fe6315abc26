//! Case files.
//!
//! INI-style: `[section]` headers, `key = value` lines, `#` comments.
//! Scalars accept constant expressions (`pi / 4`), vectors are two
//! comma-separated expressions in `x` and `y`.
//!
//! ```text
//! [domain]
//! kind = s_bend            # straight | s_bend | expansion
//! inlet_length = 1
//! bend_length = 2
//! offset = 0.7
//! outlet_length = 1.5
//! half_height = 0.5
//!
//! [mesh]
//! target_h = 0.15
//!
//! [physics]
//! eta = 0.05
//! force = 0.2 * y, 0.1 * sin(x)
//! inflow = poiseuille(1)   # or two expressions
//! sigma = 0.1 * y
//! ```
//!
//! With an `[exact]` block, `force`, `inflow` and `sigma` may be given as
//! `exact`: they are then derived from the exact pair.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{ConvectionForm, FeSpace};
use crate::field::{momentum_defect, ScalarField, VectorField};
use crate::geometry::{build_domain, DomainSpec, RigidTransform};
use crate::io::expr::Expr;
use crate::jet::Jet2;
use crate::problem::ProblemData;
use crate::reference::poiseuille_inflow;
use crate::solver::{Linearization, OutletCondition, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Straight { inlet_length: f64, outlet_length: f64, half_height: f64 },
    SBend { inlet_length: f64, bend_length: f64, offset: f64, outlet_length: f64, half_height: f64 },
    Expansion {
        inlet_length: f64,
        inlet_half_height: f64,
        transition_length: f64,
        outlet_length: f64,
        outlet_half_height: f64,
    },
}

impl Shape {
    fn kind(&self) -> &'static str {
        match self {
            Shape::Straight { .. } => "straight",
            Shape::SBend { .. } => "s_bend",
            Shape::Expansion { .. } => "expansion",
        }
    }

    fn keys(kind: &str) -> Option<&'static [&'static str]> {
        Some(match kind {
            "straight" => &["inlet_length", "outlet_length", "half_height"],
            "s_bend" => &["inlet_length", "bend_length", "offset", "outlet_length", "half_height"],
            "expansion" => &["inlet_length", "inlet_half_height", "transition_length", "outlet_length", "outlet_half_height"],
            _ => return None,
        })
    }

    fn values(&self) -> Vec<f64> {
        match *self {
            Shape::Straight { inlet_length, outlet_length, half_height } => vec![inlet_length, outlet_length, half_height],
            Shape::SBend { inlet_length, bend_length, offset, outlet_length, half_height } => {
                vec![inlet_length, bend_length, offset, outlet_length, half_height]
            }
            Shape::Expansion { inlet_length, inlet_half_height, transition_length, outlet_length, outlet_half_height } => {
                vec![inlet_length, inlet_half_height, transition_length, outlet_length, outlet_half_height]
            }
        }
    }

    fn from_values(kind: &str, v: &[f64]) -> Shape {
        match kind {
            "straight" => Shape::Straight { inlet_length: v[0], outlet_length: v[1], half_height: v[2] },
            "s_bend" => Shape::SBend { inlet_length: v[0], bend_length: v[1], offset: v[2], outlet_length: v[3], half_height: v[4] },
            _ => Shape::Expansion {
                inlet_length: v[0],
                inlet_half_height: v[1],
                transition_length: v[2],
                outlet_length: v[3],
                outlet_half_height: v[4],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub shape: Shape,
    /// Rigid motion applied after construction: rotation angle in radians,
    /// then translation.
    pub rotation: f64,
    pub translation: [f64; 2],
}

impl DomainConfig {
    pub fn spec(&self) -> DomainSpec {
        let base = match self.shape {
            Shape::Straight { inlet_length, outlet_length, half_height } => {
                DomainSpec::straight_channel(inlet_length, outlet_length, half_height)
            }
            Shape::SBend { inlet_length, bend_length, offset, outlet_length, half_height } => {
                DomainSpec::s_bend(inlet_length, bend_length, offset, outlet_length, half_height)
            }
            Shape::Expansion { inlet_length, inlet_half_height, transition_length, outlet_length, outlet_half_height } => {
                DomainSpec::expansion(inlet_length, inlet_half_height, transition_length, outlet_length, outlet_half_height)
            }
        };
        if self.rotation == 0.0 && self.translation == [0.0, 0.0] {
            base
        } else {
            base.moved(&RigidTransform::from_angle(self.rotation, self.translation))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub target_h: f64,
    /// Each refinement halves `target_h`.
    pub refinements: usize,
}

impl MeshConfig {
    pub fn h(&self, extra_levels: usize) -> f64 {
        self.target_h / 2f64.powi((self.refinements + extra_levels) as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inflow {
    Poiseuille { flux: f64 },
    Field([Expr; 2]),
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Force {
    Field([Expr; 2]),
    /// Momentum defect of the exact pair.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Traction {
    Field(Expr),
    /// `eta nu . (grad u nu) - p` of the exact pair.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub eta: f64,
    pub force: Force,
    pub inflow: Inflow,
    pub sigma: Traction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConfig {
    pub velocity: [Expr; 2],
    pub pressure: Expr,
}

impl ExactConfig {
    pub fn fields(&self) -> (VectorField, ScalarField) {
        (Expr::vector_field(&self.velocity[0], &self.velocity[1]), self.pressure.to_field())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: String,
    pub vtk: bool,
    pub mesh: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub physics: PhysicsConfig,
    pub solver: SolverConfig,
    pub exact: Option<ExactConfig>,
    pub output: OutputConfig,
}

struct Entry {
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
    used: bool,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn config_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Config { line, column, message: message.into() }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let indent = content.chars().take_while(|c| c.is_whitespace()).count();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = indent + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(config_err(line, col + trimmed.chars().count(), "expected ']'"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(config_err(line, col + 1, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(config_err(line, col, format!("duplicate section [{name}]")));
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(config_err(line, col, "expected 'key = value'"));
        };
        let key = trimmed[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(config_err(line, col, format!("invalid key '{key}'")));
        }
        let after = &trimmed[eq + 1..];
        let lead = after.chars().take_while(|c| c.is_whitespace()).count();
        let value_col = col + trimmed[..eq].chars().count() + 1 + lead;
        let Some(name) = &current else {
            return Err(config_err(line, col, format!("key '{key}' outside any section")));
        };
        let sec = sections.get_mut(name).expect("current section exists");
        if sec.entries.contains_key(key) {
            return Err(config_err(line, col, format!("duplicate key '{key}'")));
        }
        sec.entries.insert(
            key.to_string(),
            Entry { value: after.trim().to_string(), line, key_col: col, value_col, used: false },
        );
    }
    Ok(sections)
}

const SECTIONS: [&str; 6] = ["domain", "mesh", "physics", "solver", "exact", "output"];

struct Reader {
    name: &'static str,
    sec: Option<Section>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(String, usize, usize)> {
        let e = self.sec.as_mut()?.entries.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line, e.value_col))
    }

    fn missing(&self, key: &str) -> Error {
        match &self.sec {
            Some(s) => config_err(s.line, 1, format!("missing key '{key}' in [{}]", self.name)),
            None => config_err(1, 1, format!("missing section [{}]", self.name)),
        }
    }

    fn expr(&mut self, key: &str) -> Result<Option<(Expr, usize, usize)>> {
        let Some((v, line, col)) = self.take(key) else { return Ok(None) };
        let e = Expr::parse(&v).map_err(|e| config_err(line, col + e.column - 1, e.message))?;
        Ok(Some((e, line, col)))
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        let Some((e, line, col)) = self.expr(key)? else { return Ok(None) };
        if e.depends_on_position() {
            return Err(config_err(line, col, format!("'{key}' must be a constant")));
        }
        let v = e.eval(0.0, 0.0);
        if !v.is_finite() {
            return Err(config_err(line, col, format!("'{key}' is not finite")));
        }
        Ok(Some(v))
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| self.missing(key))
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        let line = self.sec.as_ref().and_then(|s| s.entries.get(key)).map(|e| (e.line, e.value_col));
        let v = match (self.number(key)?, default) {
            (Some(v), _) => v,
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(self.missing(key)),
        };
        if v <= 0.0 {
            let (l, c) = line.unwrap_or((1, 1));
            return Err(config_err(l, c, format!("'{key}' must be positive, got {v}")));
        }
        Ok(v)
    }

    fn integer(&mut self, key: &str, default: usize) -> Result<usize> {
        let Some((v, line, col)) = self.take(key) else { return Ok(default) };
        v.parse().map_err(|_| config_err(line, col, format!("'{key}' must be a non-negative integer, got '{v}'")))
    }

    fn boolean(&mut self, key: &str, default: bool) -> Result<bool> {
        let Some((v, line, col)) = self.take(key) else { return Ok(default) };
        match v.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(config_err(line, col, format!("'{key}' must be true or false, got '{v}'"))),
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)], default: T) -> Result<T> {
        let Some((v, line, col)) = self.take(key) else { return Ok(default) };
        options.iter().find(|(n, _)| *n == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            config_err(line, col, format!("'{key}' must be one of {}, got '{v}'", names.join(", ")))
        })
    }

    fn vector(&mut self, key: &str) -> Result<Option<[Expr; 2]>> {
        let Some((v, line, col)) = self.take(key) else { return Ok(None) };
        parse_vector(&v, line, col).map(Some)
    }

    /// Reject keys that were never read.
    fn finish(self) -> Result<()> {
        if let Some(s) = self.sec {
            if let Some((k, e)) = s.entries.iter().find(|(_, e)| !e.used) {
                return Err(config_err(e.line, e.key_col, format!("unknown key '{k}' in [{}]", self.name)));
            }
        }
        Ok(())
    }
}

/// Split at the single top-level comma.
fn parse_vector(v: &str, line: usize, col: usize) -> Result<[Expr; 2]> {
    let mut depth = 0i32;
    let mut commas = Vec::new();
    for (i, c) in v.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => commas.push(i),
            _ => {}
        }
    }
    if commas.len() != 1 {
        return Err(config_err(line, col, "expected two comma-separated components"));
    }
    let (a, b) = (&v[..commas[0]], &v[commas[0] + 1..]);
    let b_col = col + a.chars().count() + 1;
    let parse = |s: &str, c: usize| Expr::parse(s).map_err(|e| config_err(line, c + e.column - 1, e.message));
    Ok([parse(a, col)?, parse(b, b_col)?])
}

const LINEARIZATIONS: [(&str, Linearization); 3] = [
    ("picard", Linearization::Picard),
    ("newton", Linearization::Newton),
    ("picard_then_newton", Linearization::PicardThenNewton),
];
const OUTLETS: [(&str, OutletCondition); 2] = [("ddn", OutletCondition::Ddn), ("do_nothing", OutletCondition::DoNothing)];
const CONVECTIONS: [(&str, ConvectionForm); 2] = [("skew", ConvectionForm::Skew), ("convective", ConvectionForm::Convective)];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], t: T) -> &'static str {
    options.iter().find(|(_, v)| *v == t).map(|(n, _)| *n).expect("every variant is named")
}

fn zero_vector() -> [Expr; 2] {
    [Expr::Num(0.0), Expr::Num(0.0)]
}

impl CaseConfig {
    pub fn parse(text: &str) -> Result<CaseConfig> {
        let mut sections = tokenize(text)?;
        let mut reader = |name: &'static str| Reader { name, sec: sections.remove(name) };

        let mut r = reader("domain");
        let Some((kind, line, col)) = r.take("kind") else { return Err(r.missing("kind")) };
        let keys = Shape::keys(&kind)
            .ok_or_else(|| config_err(line, col, format!("unknown domain kind '{kind}' (straight, s_bend, expansion)")))?;
        let mut values = Vec::new();
        for k in keys {
            values.push(r.required(k)?);
        }
        let domain = DomainConfig {
            shape: Shape::from_values(&kind, &values),
            rotation: r.number("rotation")?.unwrap_or(0.0),
            translation: [r.number("translate_x")?.unwrap_or(0.0), r.number("translate_y")?.unwrap_or(0.0)],
        };
        r.finish()?;

        let mut r = reader("mesh");
        let mesh = MeshConfig { target_h: r.positive("target_h", None)?, refinements: r.integer("refinements", 0)? };
        r.finish()?;

        let mut r = reader("exact");
        let exact = if r.sec.is_some() {
            let velocity = r.vector("velocity")?.ok_or_else(|| r.missing("velocity"))?;
            let pressure = r.expr("pressure")?.ok_or_else(|| r.missing("pressure"))?.0;
            Some(ExactConfig { velocity, pressure })
        } else {
            None
        };
        r.finish()?;

        let mut r = reader("physics");
        let eta = r.positive("eta", None)?;
        let has_exact = exact.is_some();
        let wants_exact = |r: &Reader, key: &str| -> Result<bool> {
            match r.sec.as_ref().and_then(|s| s.entries.get(key)) {
                Some(e) if e.value == "exact" => {
                    if has_exact {
                        Ok(true)
                    } else {
                        Err(config_err(e.line, e.value_col, format!("'{key} = exact' needs an [exact] section")))
                    }
                }
                _ => Ok(false),
            }
        };
        let force = if wants_exact(&r, "force")? {
            r.take("force");
            Force::Exact
        } else {
            Force::Field(r.vector("force")?.unwrap_or_else(zero_vector))
        };
        let sigma = if wants_exact(&r, "sigma")? {
            r.take("sigma");
            Traction::Exact
        } else {
            Traction::Field(r.expr("sigma")?.map_or(Expr::Num(0.0), |e| e.0))
        };
        let inflow_exact = wants_exact(&r, "inflow")?;
        let inflow = match r.take("inflow") {
            None => Inflow::Field(zero_vector()),
            Some(_) if inflow_exact => Inflow::Exact,
            Some((v, line, col)) => match v.strip_prefix("poiseuille(").and_then(|s| s.strip_suffix(')')) {
                Some(arg) => {
                    let e = Expr::parse(arg).map_err(|e| config_err(line, col + 10 + e.column, e.message))?;
                    if e.depends_on_position() {
                        return Err(config_err(line, col, "poiseuille flux must be a constant"));
                    }
                    Inflow::Poiseuille { flux: e.eval(0.0, 0.0) }
                }
                None => Inflow::Field(parse_vector(&v, line, col)?),
            },
        };
        r.finish()?;
        let physics = PhysicsConfig { eta, force, inflow, sigma };

        let mut r = reader("solver");
        let d = SolverConfig::default();
        let solver = SolverConfig {
            linearization: r.choice("linearization", &LINEARIZATIONS, d.linearization)?,
            outlet: r.choice("outlet", &OUTLETS, d.outlet)?,
            convection: r.choice("convection", &CONVECTIONS, d.convection)?,
            rel_tol: r.positive("rel_tol", Some(d.rel_tol))?,
            abs_tol: r.positive("abs_tol", Some(d.abs_tol))?,
            max_iterations: r.integer("max_iterations", d.max_iterations)?,
            switch_tol: r.positive("switch_tol", Some(d.switch_tol))?,
            continuation: r.boolean("continuation", d.continuation)?,
            initial_step: r.positive("initial_step", Some(d.initial_step))?,
            min_step: r.positive("min_step", Some(d.min_step))?,
        };
        let header = r.sec.as_ref().map_or(1, |s| s.line);
        r.finish()?;
        solver.validate().map_err(|e| config_err(header, 1, e.to_string()))?;

        let mut r = reader("output");
        let output = OutputConfig {
            directory: r.take("directory").map_or_else(|| "out".to_string(), |v| v.0),
            vtk: r.boolean("vtk", true)?,
            mesh: r.boolean("mesh", true)?,
        };
        r.finish()?;

        Ok(CaseConfig { domain, mesh, physics, solver, exact, output })
    }

    /// Canonical text; parsing it gives back an equal structure.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let d = &self.domain;
        writeln!(s, "[domain]\nkind = {}", d.shape.kind()).unwrap();
        let keys = Shape::keys(d.shape.kind()).expect("known kind");
        for (k, v) in keys.iter().zip(d.shape.values()) {
            writeln!(s, "{k} = {}", Expr::constant(v)).unwrap();
        }
        writeln!(s, "rotation = {}", Expr::constant(d.rotation)).unwrap();
        writeln!(s, "translate_x = {}", Expr::constant(d.translation[0])).unwrap();
        writeln!(s, "translate_y = {}", Expr::constant(d.translation[1])).unwrap();

        writeln!(s, "\n[mesh]\ntarget_h = {}\nrefinements = {}", self.mesh.target_h, self.mesh.refinements).unwrap();

        let p = &self.physics;
        writeln!(s, "\n[physics]\neta = {}", p.eta).unwrap();
        match &p.force {
            Force::Field(f) => writeln!(s, "force = {}, {}", f[0], f[1]).unwrap(),
            Force::Exact => writeln!(s, "force = exact").unwrap(),
        }
        match &p.inflow {
            Inflow::Poiseuille { flux } => writeln!(s, "inflow = poiseuille({})", Expr::constant(*flux)).unwrap(),
            Inflow::Field(g) => writeln!(s, "inflow = {}, {}", g[0], g[1]).unwrap(),
            Inflow::Exact => writeln!(s, "inflow = exact").unwrap(),
        }
        match &p.sigma {
            Traction::Field(e) => writeln!(s, "sigma = {e}").unwrap(),
            Traction::Exact => writeln!(s, "sigma = exact").unwrap(),
        }

        let c = &self.solver;
        writeln!(s, "\n[solver]").unwrap();
        writeln!(s, "linearization = {}", name_of(&LINEARIZATIONS, c.linearization)).unwrap();
        writeln!(s, "outlet = {}", name_of(&OUTLETS, c.outlet)).unwrap();
        writeln!(s, "convection = {}", name_of(&CONVECTIONS, c.convection)).unwrap();
        writeln!(s, "rel_tol = {}\nabs_tol = {}", c.rel_tol, c.abs_tol).unwrap();
        writeln!(s, "max_iterations = {}\nswitch_tol = {}", c.max_iterations, c.switch_tol).unwrap();
        writeln!(s, "continuation = {}", c.continuation).unwrap();
        writeln!(s, "initial_step = {}\nmin_step = {}", c.initial_step, c.min_step).unwrap();

        if let Some(e) = &self.exact {
            writeln!(s, "\n[exact]\nvelocity = {}, {}\npressure = {}", e.velocity[0], e.velocity[1], e.pressure).unwrap();
        }
        let o = &self.output;
        writeln!(s, "\n[output]\ndirectory = {}\nvtk = {}\nmesh = {}", o.directory, o.vtk, o.mesh).unwrap();
        s
    }

    /// Finite element space at `extra_levels` refinements beyond the
    /// configured mesh.
    pub fn space(&self, extra_levels: usize) -> Result<FeSpace> {
        let domain = Arc::new(build_domain(self.domain.spec())?);
        Ok(FeSpace::from_domain(domain, self.mesh.h(extra_levels))?)
    }

    pub fn problem_data(&self, space: &FeSpace) -> Result<ProblemData> {
        let p = &self.physics;
        let inflow = match &p.inflow {
            Inflow::Poiseuille { flux } => {
                let domain = space.domain().ok_or_else(|| Error::argument("poiseuille inflow needs the domain"))?;
                poiseuille_inflow(domain.inlet(), *flux, p.eta)?
            }
            Inflow::Field(g) => Expr::vector_field(&g[0], &g[1]),
            Inflow::Exact => self.exact_fields()?.0,
        };
        let force = match &p.force {
            Force::Field(f) => Expr::vector_field(&f[0], &f[1]),
            Force::Exact => {
                let (u, q) = self.exact_fields()?;
                momentum_defect(p.eta, &u, &q, true)
            }
        };
        let sigma = match &p.sigma {
            Traction::Field(e) => e.to_field(),
            Traction::Exact => {
                let (u, q) = self.exact_fields()?;
                let domain = space.domain().ok_or_else(|| Error::argument("exact traction needs the domain"))?;
                let n = domain.outlet_normal();
                let eta = p.eta;
                ScalarField::new(move |x, y| {
                    let (x, y) = Jet2::variables(x.v, y.v);
                    let (uj, qj) = (u.call(x, y), q.call(x, y));
                    let dn = |c: usize| uj[c].g[0] * n[0] + uj[c].g[1] * n[1];
                    Jet2::constant(eta * (n[0] * dn(0) + n[1] * dn(1)) - qj.v)
                })
            }
        };
        ProblemData::new(p.eta, force, inflow, sigma)
    }

    pub fn exact_fields(&self) -> Result<(VectorField, ScalarField)> {
        self.exact.as_ref().map(ExactConfig::fields).ok_or_else(|| Error::argument("case has no [exact] section"))
    }
}
