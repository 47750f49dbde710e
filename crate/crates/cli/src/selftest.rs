//! Fast invariant battery behind `ucp-lab selftest`.

use ucp_lab::anderson::{ssf_dense, CouplingDistribution};
use ucp_lab::constants::{ln_c_quc_full, sfuc_beta, weight, CarlemanConfig, UcpParams};
use ucp_lab::geometry::{generate_delone, BoundaryCondition, BoxSpec, DeloneParams};
use ucp_lab::operator::{build_hamiltonian, eigs_lowest, rho_switch, EigOptions, Grid, PotentialSpec};
use ucp_lab::rng;
use ucp_lab::ucp::{extend_function, verify_ucp, ArrangementSpec, UcpRunSpec};

use crate::Failure;

type Check = Result<String, String>;

fn carleman_weight() -> Check {
    let mut worst = f64::INFINITY;
    for (k, &rho) in [0.1, 1.0, 24.0].iter().enumerate() {
        for i in 0..500u64 {
            let x: Vec<f64> = (0..3).map(|a| rho * (2.0 * rng::uniform(7, k as u64, 3 * i + a) - 1.0) / 3f64.sqrt()).collect();
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let w = weight(&x, rho).map_err(|e| e.to_string())?;
            let margin = (w - r / (3.0 * rho)).min(r / rho - w);
            worst = worst.min(margin);
        }
    }
    if worst >= -1e-10 {
        Ok(format!("worst margin {worst:.2e}"))
    } else {
        Err(format!("weight leaves its envelope by {:.2e}", -worst))
    }
}

fn dirichlet_extension() -> Check {
    let bx = BoxSpec::centered(2, 3.0, BoundaryCondition::Dirichlet).map_err(|e| e.to_string())?;
    let grid = Grid::new(bx, 24).map_err(|e| e.to_string())?;
    let h = build_hamiltonian(&grid, &PotentialSpec::Cosine { amplitude: 0.5 }.sample(&grid)).map_err(|e| e.to_string())?;
    let pairs = eigs_lowest(&h, 3, &EigOptions::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for p in &pairs {
        let ext = extend_function(&p.psi).map_err(|e| e.to_string())?;
        worst = worst.max((ext.norm_sq() / (4.0 * p.psi.norm_sq()) - 1.0).abs());
    }
    if worst <= 1e-10 {
        Ok(format!("relative norm error {worst:.2e}"))
    } else {
        Err(format!("extension norm off by {worst:.2e}"))
    }
}

fn cover_identity() -> Check {
    let spec = UcpRunSpec {
        d: 1,
        l_list: vec![5],
        bc: BoundaryCondition::Periodic,
        nodes_per_unit: 20,
        n_eigs: 3,
        delta: 0.3,
        v0: PotentialSpec::Cosine { amplitude: 0.5 },
        arrangement: ArrangementSpec::Lattice,
        t: None,
        eig: EigOptions::default(),
        config: CarlemanConfig::default(),
        seed: 0,
    };
    let s = verify_ucp(&spec).map_err(|e| e.to_string())?;
    let res = s.per_l[0].max_cover_residual.unwrap_or(f64::INFINITY);
    let ratio = s.per_l[0].min_ratio;
    if res <= 1e-10 && ratio > 0.0 {
        Ok(format!("cover residual {res:.2e}, min ratio {ratio:.4}"))
    } else {
        Err(format!("cover residual {res:.2e}, min ratio {ratio:.4}"))
    }
}

fn ssf_pair() -> Check {
    let n = 60;
    let rank = 3;
    let mut h1 = vec![0.0; n * n];
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng::uniform(11, 0, (i * n + j) as u64) - 0.5;
            h1[i * n + j] = v;
            h1[j * n + i] = v;
        }
    }
    for r in 0..rank {
        let g: Vec<f64> = (0..n).map(|i| rng::uniform(11, 1, (r * n + i) as u64) - 0.5).collect();
        for i in 0..n {
            for j in 0..n {
                u[i * n + j] += g[i] * g[j];
            }
        }
    }
    let rho = rho_switch(0.1).map_err(|e| e.to_string())?;
    let res = ssf_dense(n, &h1, &u, &rho, &[-1.0, 0.0, 1.0]).map_err(|e| e.to_string())?;
    let bounded = res.record.xi.iter().all(|&x| (0..=rank as i64).contains(&x));
    if res.max_residual <= 1e-8 && bounded {
        Ok(format!("trace residual {:.2e}", res.max_residual))
    } else {
        Err(format!("trace residual {:.2e}, xi within [0, rank]: {bounded}", res.max_residual))
    }
}

fn uniform_modulus() -> Check {
    let dist = CouplingDistribution::Uniform { a: 0.0, b: 2.0 };
    let s = dist.modulus_of_continuity(0.1);
    if (s - 0.05).abs() <= 1e-12 {
        Ok(format!("s(0.1) = {s}"))
    } else {
        Err(format!("s(0.1) = {s}, expected 0.05"))
    }
}

fn constants_monotone() -> Check {
    let config = CarlemanConfig::default();
    let at = |delta: f64, k_v: f64| {
        ln_c_quc_full(
            &UcpParams {
                d: 2,
                k_v,
                d0: 1.0,
                r: 4.0,
                delta,
                beta: sfuc_beta(2, BoundaryCondition::Periodic),
            },
            &config,
        )
        .map_err(|e| e.to_string())
    };
    let (a, b, c) = (at(0.1, 1.0)?, at(0.2, 1.0)?, at(0.2, 2.0)?);
    if a <= b && c <= b {
        Ok(format!("ln C_qUC: {a:.3} ≤ {b:.3} ≥ {c:.3}"))
    } else {
        Err(format!("ln C_qUC not monotone: {a:.3}, {b:.3}, {c:.3}"))
    }
}

fn delone_generator() -> Check {
    let params = DeloneParams {
        d: 2,
        m_tilde: 0.2,
        m: 1,
        delta: 0.05,
        perturbation: 1.0,
        n_extra: 4,
    };
    let window = BoxSpec::centered(2, 7.0, BoundaryCondition::Periodic).map_err(|e| e.to_string())?;
    let arr = generate_delone(&params, &window, 5).map_err(|e| e.to_string())?;
    let check = arr.validate(&window);
    if check.is_ok() && arr.balls_inside_cells(params.delta) {
        Ok(format!("{} + {} points", arr.gamma1.len(), arr.gamma2.len()))
    } else {
        Err(format!("{check:?}"))
    }
}

pub fn run() -> Result<(), Failure> {
    let checks: [(&str, fn() -> Check); 7] = [
        ("carleman weight envelope", carleman_weight),
        ("dirichlet extension norm", dirichlet_extension),
        ("periodic cover identity", cover_identity),
        ("spectral shift trace identity", ssf_pair),
        ("uniform modulus of continuity", uniform_modulus),
        ("constants monotonicity", constants_monotone),
        ("delone generator", delone_generator),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Compute(format!("{failed} selftest check(s) failed")))
    }
}
