use std::path::PathBuf;
use std::sync::Arc;

use pipeflow::fem::FeSpace;
use pipeflow::geometry::{build_domain, DomainSpec};
use pipeflow::io::{
    read_table, sha256_hex, write_vtk, CaseConfig, Cell, DomainConfig, ExactConfig, Expr, Force, Inflow, MeshConfig,
    OutputConfig, PhysicsConfig, RunDir, RunManifest, Shape, Table, Traction, MANIFEST_NAME,
};
use pipeflow::solver::{Linearization, OutletCondition, SolverConfig};
use pipeflow::Error;
use proptest::prelude::*;

fn cases_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

fn config_error(text: &str) -> (usize, usize, String) {
    match CaseConfig::parse(text) {
        Err(Error::Config { line, column, message }) => (line, column, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

const MINIMAL: &str = "[domain]\nkind = straight\ninlet_length = 1\noutlet_length = 1\nhalf_height = 1\n\n[mesh]\ntarget_h = 0.5\n\n[physics]\neta = 1\n";

#[test]
fn shipped_cases_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(cases_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ini") {
            let cfg = CaseConfig::parse(&std::fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(CaseConfig::parse(&cfg.to_ini()).unwrap(), cfg, "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 3);
}

#[test]
fn defaults_fill_optional_keys() {
    let cfg = CaseConfig::parse(MINIMAL).unwrap();
    assert_eq!(cfg.solver, SolverConfig::default());
    assert_eq!(cfg.physics.force, Force::Field([Expr::Num(0.0), Expr::Num(0.0)]));
    assert_eq!(cfg.physics.sigma, Traction::Field(Expr::Num(0.0)));
    assert_eq!(cfg.mesh.refinements, 0);
    assert!(cfg.exact.is_none());
    assert_eq!(cfg.output.directory, "out");
}

#[test]
fn comments_and_constant_expressions() {
    let text = MINIMAL.replace("eta = 1", "eta = 1 / 4   # quarter\n# whole line\nforce = sin(pi * x), -y");
    let cfg = CaseConfig::parse(&text).unwrap();
    assert_eq!(cfg.physics.eta, 0.25);
    let Force::Field(f) = &cfg.physics.force else { panic!() };
    assert_eq!(f[1].eval(0.0, 2.0), -2.0);
}

#[test]
fn errors_point_at_the_offending_text() {
    let (l, c, m) = config_error(&MINIMAL.replace("half_height = 1", "half_height = 1\nwidth = 3"));
    assert_eq!((l, c), (6, 1), "{m}");
    assert!(m.contains("width"));

    let (l, c, _) = config_error(&MINIMAL.replace("eta = 1", "eta = 2 * (x"));
    assert_eq!((l, c), (11, 13));

    let (l, c, _) = config_error(&MINIMAL.replace("eta = 1", "eta = 1\nforce = 1, 2 $ 3"));
    assert_eq!((l, c), (12, 14));

    let (l, c, _) = config_error(&MINIMAL.replace("eta = 1", "eta = x"));
    assert_eq!((l, c), (11, 7));

    let (l, _, m) = config_error(&format!("{MINIMAL}\n[solver]\noutlet = open\n"));
    assert_eq!(l, 14, "{m}");

    let (l, c, _) = config_error(&format!("{MINIMAL}[physic]\n"));
    assert_eq!((l, c), (12, 2));

    let (l, _, m) = config_error(&MINIMAL.replace("[mesh]\ntarget_h = 0.5\n", ""));
    assert!(m.contains("[mesh]") && l == 1, "{m}");

    let (l, _, m) = config_error(&MINIMAL.replace("inlet_length = 1\n", ""));
    assert!(m.contains("inlet_length") && l == 1, "{m}");

    let (l, c, _) = config_error(&MINIMAL.replace("eta = 1", "eta = 1\neta = 2"));
    assert_eq!((l, c), (12, 1));

    let (l, c, m) = config_error(&MINIMAL.replace("eta = 1", "eta = 1\nforce = exact"));
    assert_eq!((l, c), (12, 9), "{m}");

    let (l, c, _) = config_error(&MINIMAL.replace("eta = 1", "eta = -1"));
    assert_eq!((l, c), (11, 7));

    let (l, _, _) = config_error(&format!("{MINIMAL}\n[solver]\nmin_step = 0.5\ninitial_step = 0.1\n"));
    assert_eq!(l, 13);

    let (l, c, _) = config_error("eta = 1\n");
    assert_eq!((l, c), (1, 1));
}

#[test]
fn poiseuille_inflow_flux() {
    let cfg = CaseConfig::parse(&MINIMAL.replace("eta = 1", "eta = 1\ninflow = poiseuille(2)")).unwrap();
    assert_eq!(cfg.physics.inflow, Inflow::Poiseuille { flux: 2.0 });
    let space = cfg.space(0).unwrap();
    let data = cfg.problem_data(&space).unwrap();
    // 2 * 3/4 at the center of a channel of half-height 1.
    assert!((data.inflow.value([0.0, 0.0])[0] - 1.5).abs() < 1e-14);
    let (_, c, _) = config_error(&MINIMAL.replace("eta = 1", "eta = 1\ninflow = poiseuille(1 +)"));
    assert_eq!(c, 24);
}

#[test]
fn exact_data_reproduces_a_stokes_pair() {
    let text = format!(
        "{}\n[exact]\nvelocity = 1 - y^2, 0\npressure = 2 * (2 - x) + 0.5\n",
        MINIMAL.replace("eta = 1", "eta = 1\nforce = exact\ninflow = exact\nsigma = exact")
    );
    let cfg = CaseConfig::parse(&text).unwrap();
    let space = cfg.space(0).unwrap();
    let d = cfg.problem_data(&space).unwrap();
    assert_eq!(d.force.value([0.3, 0.2]), [0.0, 0.0]);
    assert!((d.sigma.value([2.0, 0.4]) + 0.5).abs() < 1e-15);
    assert_eq!(d.inflow.value([0.0, 0.5]), [0.75, 0.0]);
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0.0..10.0f64).prop_map(Expr::Num), Just(Expr::X), Just(Expr::Y), Just(Expr::Pi)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Expr::Call(pipeflow::io::expr::Func::Sin, Box::new(a))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Bin(pipeflow::io::expr::BinOp::Mul, Box::new(a), Box::new(b))),
        ]
    })
}

fn arb_vector() -> impl Strategy<Value = [Expr; 2]> {
    (arb_expr(), arb_expr()).prop_map(|(a, b)| [a, b])
}

fn arb_shape() -> impl Strategy<Value = Shape> {
    let p = 0.1..5.0f64;
    prop_oneof![
        (p.clone(), p.clone(), p.clone())
            .prop_map(|(a, b, c)| Shape::Straight { inlet_length: a, outlet_length: b, half_height: c }),
        (p.clone(), p.clone(), -2.0..2.0f64, p.clone(), p.clone()).prop_map(|(a, b, c, d, e)| Shape::SBend {
            inlet_length: a,
            bend_length: b,
            offset: c,
            outlet_length: d,
            half_height: e
        }),
        (p.clone(), p.clone(), p.clone(), p.clone(), p).prop_map(|(a, b, c, d, e)| Shape::Expansion {
            inlet_length: a,
            inlet_half_height: b,
            transition_length: c,
            outlet_length: d,
            outlet_half_height: e
        }),
    ]
}

fn arb_solver() -> impl Strategy<Value = SolverConfig> {
    (
        prop_oneof![Just(Linearization::Picard), Just(Linearization::Newton), Just(Linearization::PicardThenNewton)],
        prop_oneof![Just(OutletCondition::Ddn), Just(OutletCondition::DoNothing)],
        any::<bool>(),
        1e-14..1e-2f64,
        1usize..500,
        any::<bool>(),
        (0.1..1.0f64, 0.01..1.0f64),
    )
        .prop_map(|(linearization, outlet, skew, tol, max_iterations, continuation, (step, frac))| SolverConfig {
            linearization,
            outlet,
            convection: if skew { pipeflow::fem::ConvectionForm::Skew } else { pipeflow::fem::ConvectionForm::Convective },
            rel_tol: tol,
            abs_tol: tol * 1e-3,
            max_iterations,
            switch_tol: tol.sqrt(),
            continuation,
            initial_step: step,
            min_step: step * frac,
        })
}

fn arb_config() -> impl Strategy<Value = CaseConfig> {
    (
        (arb_shape(), -3.0..3.0f64, -5.0..5.0f64, -5.0..5.0f64),
        (0.01..1.0f64, 0usize..4),
        (1e-4..10.0f64, arb_vector(), prop_oneof![(-3.0..3.0f64).prop_map(|flux| Inflow::Poiseuille { flux }), arb_vector().prop_map(Inflow::Field), Just(Inflow::Exact)], arb_expr(), any::<bool>()),
        arb_solver(),
        (arb_vector(), arb_expr()),
        ("[a-z][a-z0-9_/]{0,12}", any::<bool>(), any::<bool>()),
    )
        .prop_map(|((shape, rotation, tx, ty), (target_h, refinements), (eta, force, inflow, sigma, exact_data), solver, (ev, ep), (dir, vtk, mesh))| {
            let exact = Some(ExactConfig { velocity: ev, pressure: ep });
            let (force, sigma) = if exact_data {
                (Force::Exact, Traction::Exact)
            } else {
                (Force::Field(force), Traction::Field(sigma))
            };
            CaseConfig {
                domain: DomainConfig { shape, rotation, translation: [tx, ty] },
                mesh: MeshConfig { target_h, refinements },
                physics: PhysicsConfig { eta, force, inflow, sigma },
                solver,
                exact,
                output: OutputConfig { directory: dir, vtk, mesh },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn config_round_trip(cfg in arb_config()) {
        let text = cfg.to_ini();
        let parsed = CaseConfig::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_ini(), text);
    }
}

fn small_space() -> FeSpace {
    FeSpace::from_domain(Arc::new(build_domain(DomainSpec::straight_channel(0.5, 0.5, 0.5)).unwrap()), 0.25).unwrap()
}

#[test]
fn vtk_layout() {
    let s = small_space();
    let u: Vec<f64> = (0..s.n_velocity()).map(|i| i as f64).collect();
    let p: Vec<f64> = (0..s.n_pressure()).map(|i| -(i as f64)).collect();
    let mut buf = Vec::new();
    write_vtk(&s, &u, &p, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let (nv, nt) = (s.mesh().num_vertices(), s.mesh().num_triangles());
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[2], "ASCII");
    assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
    assert_eq!(lines[4], format!("POINTS {nv} double"));
    let at = |key: &str| lines.iter().position(|l| l.starts_with(key)).unwrap();
    assert_eq!(lines[at("CELLS")], format!("CELLS {nt} {}", 4 * nt));
    let types = at("CELL_TYPES");
    assert!(lines[types + 1..types + 1 + nt].iter().all(|l| *l == "5"));
    assert_eq!(lines[at("POINT_DATA")], format!("POINT_DATA {nv}"));
    let vel = at("VECTORS velocity double");
    let n = s.n_nodes();
    for i in [0, nv - 1] {
        let vals: Vec<f64> = lines[vel + 1 + i].split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(vals, vec![i as f64, (n + i) as f64, 0.0]);
    }
    let pres = at("SCALARS pressure double");
    assert_eq!(lines[pres + 1], "LOOKUP_TABLE default");
    assert_eq!(lines.len(), pres + 2 + nv);
    assert_eq!(lines[pres + 2 + nv - 1].parse::<f64>().unwrap(), -((nv - 1) as f64));
    let tri = &s.mesh().triangles[0];
    assert_eq!(lines[at("CELLS") + 1], format!("3 {} {} {}", tri[0], tri[1], tri[2]));
}

#[test]
fn manifest_lists_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut run = RunDir::create(dir.path().join("run")).unwrap();
    let mut t = Table::new(&["a", "b"]);
    t.push(vec![Cell::Float(0.1), Cell::Na]);
    run.write("table.csv", &t.to_bytes()).unwrap();
    run.write("notes.txt", b"first").unwrap();
    run.write("notes.txt", b"second").unwrap();
    let mut m = RunManifest::new("test", "config text");
    m.timings_s.insert("total".into(), 0.5);
    let path = run.finish(m).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["config_sha256"], sha256_hex(b"config text"));
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
    let files = json["files"].as_array().unwrap();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path().join("run"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != MANIFEST_NAME)
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = files.iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
    for f in files {
        let bytes = std::fs::read(dir.path().join("run").join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"], sha256_hex(&bytes));
        assert_eq!(f["bytes"], bytes.len());
    }
    let (h, rows) = read_table(&std::fs::read(dir.path().join("run/table.csv")).unwrap()[..]).unwrap();
    assert_eq!(h, vec!["a", "b"]);
    assert_eq!(rows, vec![vec!["1.0000000000000001e-1".to_string(), "NA".to_string()]]);
}

#[test]
fn sha256_known_value() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
