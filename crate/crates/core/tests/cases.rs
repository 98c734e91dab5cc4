use std::path::Path;

use gpcol::casebook::{build_case, case_config, fd_solve_heat1d, CaseId, DISK_GAUSSIAN_SEED};
use gpcol::config::ProblemConfig;
use gpcol::geometry::{distance, Domain, SamplingStrategy};
use gpcol::gp::{assemble, log_marginal_likelihood, select_lengthscale, LengthscaleGrid, PosteriorField, BASE_JITTER};
use gpcol::Error;

#[test]
fn every_case_builds_a_valid_discretization() {
    for id in CaseId::ALL {
        let (n_i, n_b) = id.default_counts();
        let spec = build_case(id, n_i, n_b).unwrap();
        let d = &spec.discretization;
        assert_eq!(d.interior.len(), n_i, "{id}");
        assert_eq!(d.boundary.len(), n_b, "{id}");
        d.validate(&spec.domain).unwrap();
        for p in &d.interior {
            assert!(spec.domain.contains(p).unwrap(), "{id}: {p:?}");
        }
        for b in &d.boundary {
            assert!(spec.domain.on_boundary(&b.point).unwrap(), "{id}: {:?}", b.point);
        }
        let min_gap = d
            .interior
            .iter()
            .enumerate()
            .flat_map(|(i, p)| d.interior[i + 1..].iter().map(move |q| distance(p, q)))
            .fold(f64::INFINITY, f64::min);
        assert!(min_gap > 1e-9 * spec.domain.diameter().unwrap(), "{id}");
    }
}

#[test]
fn boundary_normals_point_outward() {
    for id in [CaseId::DiskPoisson, CaseId::StarGaussianSource] {
        let spec = build_case(id, 8, 24).unwrap();
        for b in &spec.discretization.boundary {
            let n = spec.domain.outward_normal(&b.point).unwrap();
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-12);
            let step = |t: f64| vec![b.point[0] + t * n[0], b.point[1] + t * n[1]];
            assert!(!spec.domain.contains_closed(&step(1e-4)).unwrap(), "{id}");
            assert!(spec.domain.contains(&step(-1e-4)).unwrap(), "{id}");
        }
    }
    let interval = Domain::interval(0.0, 3.0).unwrap();
    assert_eq!(interval.outward_normal(&[0.0]).unwrap(), vec![-1.0]);
    assert_eq!(interval.outward_normal(&[3.0]).unwrap(), vec![1.0]);
}

#[test]
fn seeded_layouts_are_reproducible() {
    let strategy = SamplingStrategy::UniformRandom { seed: DISK_GAUSSIAN_SEED };
    let a = Domain::UnitDisk.sample_interior(50, strategy).unwrap();
    let b = Domain::UnitDisk.sample_interior(50, strategy).unwrap();
    assert_eq!(a, b);
    let other = Domain::UnitDisk
        .sample_interior(50, SamplingStrategy::UniformRandom { seed: DISK_GAUSSIAN_SEED + 1 })
        .unwrap();
    assert_ne!(a, other);
}

#[test]
fn disk_poisson_system_shape() {
    let spec = build_case(CaseId::DiskPoisson, 16, 5).unwrap();
    let sys = assemble(&spec).unwrap();
    assert_eq!(sys.len(), 21);
    let c = sys.covariance();
    assert!((c - c.transpose()).amax() <= 1e-12 * c.amax());
    let l = sys.factor();
    let mut shifted = c.clone();
    for i in 0..21 {
        shifted[(i, i)] += sys.jitter_used();
    }
    let rel = (&l * l.transpose() - &shifted).norm() / shifted.norm();
    assert!(rel <= 1e-8, "{rel}");
}

#[test]
fn disk_poisson_center_value() {
    let field = PosteriorField::new(build_case(CaseId::DiskPoisson, 16, 5).unwrap()).unwrap();
    let m = field.mean(&[0.0, 0.0]).unwrap();
    assert!((m - 0.25).abs() < 1e-3, "{m}");
}

#[test]
fn duplicate_interior_point_is_regularized_or_rejected() {
    let mut spec = build_case(CaseId::DiskPoisson, 16, 5).unwrap();
    let p = spec.discretization.interior[3].clone();
    spec.discretization.interior.push(p);
    match assemble(&spec) {
        // The base jitter alone already makes the duplicated system factorizable.
        Ok(sys) => {
            let base = BASE_JITTER * sys.covariance().diagonal().max();
            assert!(sys.jitter_used() >= base * (1.0 - 1e-12));
            let field = PosteriorField::new(spec).unwrap();
            assert!(field.mean(&[0.0, 0.0]).unwrap().is_finite());
        }
        Err(e) => assert!(matches!(e, Error::IllConditioned { .. }), "{e}"),
    }
}

#[test]
fn zero_data_gives_zero_mean_and_determinant_only_likelihood() {
    let mut config = case_config(CaseId::DiskPoisson, 16, 5);
    config.source = "0".into();
    let spec = config.to_spec().unwrap();
    let field = PosteriorField::new(spec.clone()).unwrap();
    for p in [[0.0, 0.0], [0.3, -0.4], [2.0, 2.0]] {
        assert_eq!(field.mean(&p).unwrap(), 0.0);
    }
    let sys = assemble(&spec).unwrap();
    let n = sys.len() as f64;
    let expected = -0.5 * sys.log_determinant() - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
    assert!((log_marginal_likelihood(&spec).unwrap() - expected).abs() <= 1e-12 * expected.abs());
}

/// With `s = 0.1` fixed, the evidence of the disk problem peaks well inside
/// the default grid, at a lengthscale below one.
#[test]
fn disk_poisson_likelihood_optimum() {
    let spec = build_case(CaseId::DiskPoisson, 16, 5).unwrap();
    let grid = LengthscaleGrid::default_for(&spec.domain).unwrap().values();
    let profile = select_lengthscale(&spec, &grid).unwrap();
    let idx = grid.iter().position(|l| *l == profile.best).unwrap();
    assert!(idx > 0 && idx + 1 < grid.len());
    assert!((0.4..0.8).contains(&profile.best), "{}", profile.best);
    let peak = profile.normalized().iter().map(|p| p.1).fold(0.0, f64::max);
    assert_eq!(peak, 1.0);
}

#[test]
fn heat_likelihood_profiles_peak_inside_the_grid() {
    for n_i in [20, 40, 80] {
        let spec = build_case(CaseId::Heat1d, n_i, 2).unwrap();
        let grid = LengthscaleGrid::default_for(&spec.domain).unwrap().values();
        let profile = select_lengthscale(&spec, &grid).unwrap();
        let idx = grid.iter().position(|l| *l == profile.best).unwrap();
        assert!(idx > 0 && idx + 1 < grid.len(), "n_i={n_i}: index {idx}");
    }
}

#[test]
fn heat_reference_solution_properties() {
    let fd = fd_solve_heat1d(4000).unwrap();
    assert_eq!(fd.value_at(3.0).unwrap(), 0.0);
    assert!(fd.neumann_residual() <= 1e-12);
    // Independent shooting check of the sign and size of the solution.
    let u0 = fd.value_at(0.0).unwrap();
    assert!((u0 + 5.12225).abs() < 1e-4, "{u0}");
}

#[test]
fn configs_round_trip_through_json() {
    for id in CaseId::ALL {
        let (n_i, n_b) = id.default_counts();
        let config = case_config(id, n_i, n_b);
        let back = ProblemConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(back, config, "{id}");
        assert_eq!(back.to_spec().unwrap(), config.to_spec().unwrap(), "{id}");
    }
}

#[test]
fn shipped_configs_match_the_casebook() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for id in CaseId::ALL {
        let (n_i, n_b) = id.default_counts();
        let shipped = ProblemConfig::load(&dir.join(format!("{id}.json"))).unwrap();
        assert_eq!(shipped, case_config(id, n_i, n_b), "{id}");
    }
}

#[test]
fn case_ids_parse() {
    for id in CaseId::ALL {
        assert_eq!(id.as_str().parse::<CaseId>().unwrap(), id);
    }
    assert!("heat2d".parse::<CaseId>().is_err());
}
