//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so every criterion reports even when an earlier one
//! fails. The exit code is zero unless `ACCEPTANCE_STRICT` is set, in which
//! case any failure exits with status 1.

mod common;

use std::time::Instant;

use common::*;
use ed_align::binding::compute_weights;
use ed_align::deform::ed_point_jacobians;
use ed_align::eiae::toy::{evaluate, init_networks};
use ed_align::eiae::{train_eiae, DenseNet, ToyConfig};
use ed_align::losses::*;
use ed_align::registration::{register, rig, BindingMethod, RegistrationConfig};
use ed_align::rotation::matrix_to_rot6d;
use ed_align::spatial::KdTree;
use ed_align::*;
use nalgebra::{DMatrix, Matrix3, UnitQuaternion, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 50;
const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    loop {
        let q = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if q.norm() > 0.1 {
            let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::from_vector(q));
            return *q.to_rotation_matrix().matrix();
        }
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn jitter(rng: &mut ChaCha8Rng, x: &[f64], amp: f64) -> Vec<f64> {
    x.iter().map(|v| v + rng.random_range(-amp..amp)).collect()
}

fn dot(a: &[Point3], b: &[Point3]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dot(q)).sum()
}

/// Worst relative error over `INSTANCES` runs of `check`.
fn family(check: impl Fn(u64) -> f64) -> f64 {
    (0..INSTANCES as u64).map(check).fold(0.0, f64::max)
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let sphere = shapes::icosphere(1);
    let mut worst = Vec::new();

    worst.push((
        "ed-jacobian",
        family(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rig(&sphere, 3, seed, BindingMethod::Trace).unwrap();
            let mut g = r.graph.clone();
            let theta = jitter(&mut rng, &g.flat_params(), 0.3);
            g.set_flat_params(&theta).unwrap();
            let probe = random_points(&mut rng, sphere.vertex_count());
            let jac = ed_jacobian(sphere.vertices(), &g, &r.binding).unwrap();
            let analytic = jac.transpose_mul(&probe);
            let fd = fd_gradient(&theta, FD_STEP, |t| {
                let mut h = g.clone();
                h.set_flat_params(t).unwrap();
                dot(&apply_ed(sphere.vertices(), &h, &r.binding).unwrap(), &probe)
            });
            rel_err(&fd, &analytic)
        }),
    ));

    worst.push((
        "chamfer",
        family(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let a = random_points(&mut rng, 20);
            let b = random_points(&mut rng, 25);
            let analytic = flatten(&chamfer(&a, &b).unwrap().grad);
            let fd = fd_gradient(&flatten(&a), FD_STEP, |x| chamfer(&unflatten(x), &b).unwrap().value);
            rel_err(&fd, &analytic)
        }),
    ));

    worst.push((
        "arap",
        family(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            let r = rig(&sphere, 3, seed, BindingMethod::Trace).unwrap();
            let mut g = r.graph;
            let theta = jitter(&mut rng, &g.flat_params(), 0.3);
            g.set_flat_params(&theta).unwrap();
            let analytic = arap(&g).unwrap().1;
            let fd = fd_gradient(&theta, FD_STEP, |t| {
                let mut h = g.clone();
                h.set_flat_params(t).unwrap();
                arap(&h).unwrap().0
            });
            rel_err(&fd, &analytic)
        }),
    ));

    let perturbed = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        jitter(&mut rng, &flatten(sphere.vertices()), 0.1)
    };
    worst.push((
        "edge",
        family(|seed| {
            let x = perturbed(seed);
            let analytic = flatten(&edge_loss(&sphere, &unflatten(&x)).unwrap().loss.grad);
            let fd = fd_gradient(&x, FD_STEP, |y| edge_loss(&sphere, &unflatten(y)).unwrap().loss.value);
            rel_err(&fd, &analytic)
        }),
    ));
    worst.push((
        "laplacian",
        family(|seed| {
            let x = perturbed(seed);
            let analytic = flatten(&laplacian_loss(&sphere, &unflatten(&x)).unwrap().grad);
            let fd = fd_gradient(&x, FD_STEP, |y| laplacian_loss(&sphere, &unflatten(y)).unwrap().value);
            rel_err(&fd, &analytic)
        }),
    ));

    // round trip through a forward and a backward graph, differentiated with
    // respect to both parameter vectors
    let target = shapes::icosphere(1);
    worst.push((
        "cycle",
        family(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
            let fwd = rig(&sphere, 3, seed, BindingMethod::Trace).unwrap();
            let bwd = rig(&target, 3, seed + 1, BindingMethod::Trace).unwrap();
            let nf = fwd.graph.flat_params().len();
            let mut theta = jitter(&mut rng, &fwd.graph.flat_params(), 0.2);
            theta.extend(jitter(&mut rng, &bwd.graph.flat_params(), 0.2));
            let graphs = |t: &[f64]| {
                let (mut f, mut b) = (fwd.graph.clone(), bwd.graph.clone());
                f.set_flat_params(&t[..nf]).unwrap();
                b.set_flat_params(&t[nf..]).unwrap();
                (f, b)
            };
            let (f, b) = graphs(&theta);
            let deformed = apply_ed(sphere.vertices(), &f, &fwd.binding).unwrap();
            let sel = bwd.binding.select(&nearest_indices(&deformed, &KdTree::new(target.vertices())));
            let cycled = apply_ed(&deformed, &b, &sel).unwrap();
            let gc = cycle_loss(sphere.vertices(), &cycled).unwrap().grad;
            let pj = ed_point_jacobians(&b, &sel).unwrap();
            let through: Vec<Point3> = pj.iter().zip(&gc).map(|(m, g)| m.transpose() * g).collect();
            let mut analytic = ed_jacobian(sphere.vertices(), &f, &fwd.binding).unwrap().transpose_mul(&through);
            analytic.extend(ed_jacobian(&deformed, &b, &sel).unwrap().transpose_mul(&gc));
            let fd = fd_gradient(&theta, FD_STEP, |t| {
                let (f, b) = graphs(t);
                let d = apply_ed(sphere.vertices(), &f, &fwd.binding).unwrap();
                cycle_loss(sphere.vertices(), &apply_ed(&d, &b, &sel).unwrap()).unwrap().value
            });
            rel_err(&fd, &analytic)
        }),
    ));

    worst.push((
        "mmd",
        family(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
            let x = FeatureSet::new(DMatrix::from_fn(6, 3, |_, _| rng.random_range(-1.0..1.0))).unwrap();
            let y = DMatrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
            let kernel = KernelConfig::default();
            let analytic = mmd(&x, &FeatureSet::new(y.clone()).unwrap(), &kernel).unwrap().1;
            let fd = fd_gradient(y.as_slice(), FD_STEP, |v| {
                let m = DMatrix::from_column_slice(5, 3, v);
                mmd(&x, &FeatureSet::new(m).unwrap(), &kernel).unwrap().0
            });
            rel_err(&fd, analytic.as_slice())
        }),
    ));

    worst.push((
        "dense",
        family(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
            let dims: Vec<usize> = (0..rng.random_range(2..5)).map(|_| rng.random_range(2..7)).collect();
            let net = DenseNet::random(&dims, &mut rng).unwrap();
            let rows = rng.random_range(1..5);
            let input = DMatrix::from_fn(rows, dims[0], |_, _| rng.random_range(-1.0..1.0));
            let probe = DMatrix::from_fn(rows, *dims.last().unwrap(), |_, _| rng.random_range(-1.0..1.0));
            let (_, cache) = net.forward(&input).unwrap();
            let grads = net.backward(&cache, &probe).unwrap();
            let p = net.params();
            let fd_p = fd_gradient(&p, FD_STEP, |q| {
                let mut n = net.clone();
                n.set_params(q).unwrap();
                n.forward(&input).unwrap().0.component_mul(&probe).sum()
            });
            let fd_x = fd_gradient(input.as_slice(), FD_STEP, |v| {
                let m = DMatrix::from_column_slice(rows, dims[0], v);
                net.forward(&m).unwrap().0.component_mul(&probe).sum()
            });
            rel_err(&fd_p, &grads.flatten()).max(rel_err(&fd_x, grads.input.as_slice()))
        }),
    ));

    let secs = start.elapsed().as_secs_f64();
    let pass = worst.iter().all(|(_, e)| *e < FD_TOL) && secs < 60.0;
    let list: Vec<String> = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect();
    Outcome::new(
        pass,
        format!("{INSTANCES} instances each, worst rel err: {}; {secs:.1} s", list.join(", ")),
    )
}

fn ed_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mesh = shapes::torus(1.0, 0.3, 24, 16);
    let r = rig(&mesh, 3, 0, BindingMethod::Trace).unwrap();
    let identity_exact = apply_ed(mesh.vertices(), &r.graph, &r.binding).unwrap() == mesh.vertices();

    let mut rigid_dev = 0.0f64;
    for _ in 0..20 {
        let rot = random_rotation(&mut rng);
        let t = Vector3::from_fn(|_, _| rng.random_range(-2.0..2.0));
        let mut g = r.graph.clone();
        g.set_global_rigid(&rot, &t);
        let moved = apply_ed(mesh.vertices(), &g, &r.binding).unwrap();
        for (m, v) in moved.iter().zip(mesh.vertices()) {
            rigid_dev = rigid_dev.max((m - (rot * v + t)).amax());
        }
    }

    let mut round_trip = 0.0f64;
    for _ in 0..1000 {
        let rot = random_rotation(&mut rng);
        let back = rot6d_to_matrix(&matrix_to_rot6d(&rot)).unwrap();
        round_trip = round_trip.max((back - rot).amax());
    }
    Outcome::new(
        identity_exact && rigid_dev < 1e-10 && round_trip < 1e-12,
        format!("identity exact: {identity_exact}; rigid max dev {rigid_dev:.1e}; rot6d round trip {round_trip:.1e}"),
    )
}

fn mmd_oracle() -> Outcome {
    let kernel = KernelConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut self_max = 0.0f64;
    for _ in 0..50 {
        let x = FeatureSet::new(DMatrix::from_fn(rng.random_range(1..20), 4, |_, _| rng.random_range(-3.0..3.0))).unwrap();
        self_max = self_max.max(mmd(&x, &x, &kernel).unwrap().0.abs());
    }

    let p = Vector3::new(1.0, 1.0, 0.0);
    let x = FeatureSet::from_rows(&[vec![0.0; 3]]).unwrap();
    let y = FeatureSet::from_rows(&[p.as_slice().to_vec()]).unwrap();
    let value = mmd(&x, &y, &kernel).unwrap().0;
    let rbf = |d2: f64| -> f64 { kernel.sigmas.iter().map(|s| (-d2 / (2.0 * s * s)).exp()).sum() };
    let direct = rbf(0.0) + rbf(0.0) - 2.0 * rbf(p.norm_squared());
    let single_err = (value - direct).abs();

    let mut hinge_ok = true;
    let mut straddle = [0usize; 2];
    for i in 0..200 {
        let scale = 0.02 + 0.4 * i as f64 / 200.0;
        let x = FeatureSet::new(DMatrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let y = FeatureSet::new(x.matrix().map(|v| v + scale * rng.random_range(-1.0..1.0))).unwrap();
        let raw = mmd(&x, &y, &kernel).unwrap().0;
        let (b, g) = bounded_mmd(&x, &y, &kernel, 0.01).unwrap();
        if raw <= 0.01 {
            straddle[0] += 1;
            hinge_ok &= b == 0.0 && g.iter().all(|&v| v == 0.0);
        } else {
            straddle[1] += 1;
            hinge_ok &= b == raw - 0.01;
        }
    }
    Outcome::new(
        self_max <= 1e-12 && single_err <= 1e-10 && hinge_ok && straddle[0] > 0 && straddle[1] > 0,
        format!(
            "max mmd(x,x) {self_max:.1e}; single pair {value:.6} vs direct {direct:.6} (err {single_err:.1e}); \
             hinge exact on {} below / {} above beta",
            straddle[0], straddle[1]
        ),
    )
}

fn hierarchy_check() -> Outcome {
    let dense = shapes::torus(1.0, 0.3, 106, 65);
    let mesh = qem_decimate(&dense, 2757).unwrap().mesh;
    let h = build_hierarchy(&mesh, 4, 0).unwrap();
    let sizes = h.level_sizes();
    let ratios: Vec<f64> = sizes.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let ratios_ok = ratios.iter().all(|r| (0.45..=0.58).contains(r));

    let clusters = h.trace_all();
    let mut seen = vec![0usize; mesh.vertex_count()];
    for c in &clusters {
        for &v in c {
            seen[v] += 1;
        }
    }
    let partition = clusters.len() == h.coarsest().len()
        && clusters.iter().all(|c| !c.is_empty())
        && seen.iter().all(|&s| s == 1);

    let best = (0..5)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(h.trace_all());
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min);
    Outcome::new(
        sizes[0] == 2757 && ratios_ok && partition && best < 0.010,
        format!(
            "sizes {sizes:?}, ratios {:?}; partition {partition}; trace_all {:.2} ms",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            best * 1e3
        ),
    )
}

fn binding_comparison() -> Outcome {
    let (src, tgt, lower) = lifted_strips(0.3);
    let strip = |v: usize| v >= lower;
    let cross = |method: BindingMethod| {
        let r = rig(&src, 4, 3, method).unwrap();
        let owner = r.hierarchy.composed_assignment();
        // every cluster lies in one strip since the strips share no edge
        let mut node_strip = vec![false; r.graph.node_count()];
        for (v, &n) in owner.iter().enumerate() {
            node_strip[n] = strip(v);
        }
        r.binding
            .controls
            .iter()
            .enumerate()
            .map(|(v, c)| c.iter().filter(|&&n| node_strip[n] != strip(v)).count())
            .sum::<usize>()
    };
    let cross_trace = cross(BindingMethod::Trace);
    let cross_knn = cross(BindingMethod::Knn { k: 4 });

    let run = |method: BindingMethod| {
        let mut cfg = RegistrationConfig::with_iters(500);
        cfg.binding = method;
        cfg.rng_seed = 3;
        let r = register(&src, &tgt, &cfg).unwrap();
        let energy = arap(&r.graph).unwrap().0;
        let to_truth = chamfer(r.deformed.vertices(), tgt.vertices()).unwrap().value;
        (energy, to_truth)
    };
    let (arap_t, ch_t) = run(BindingMethod::Trace);
    let (arap_k, ch_k) = run(BindingMethod::Knn { k: 4 });
    Outcome::new(
        cross_knn > 0 && cross_trace == 0 && arap_t < arap_k && ch_t < ch_k,
        format!(
            "cross-strip controls trace {cross_trace}, knn {cross_knn}; after lift ARAP trace {arap_t:.2e} vs knn \
             {arap_k:.2e}, Chamfer to truth trace {ch_t:.2e} vs knn {ch_k:.2e}"
        ),
    )
}

fn registration_check() -> Outcome {
    let cyl = shapes::cylinder(0.3, 2.0, 20, 40);
    let own = register(&cyl, &cyl, &RegistrationConfig::default()).unwrap();
    let a = own.final_chamfer < 1e-10;

    let tube = asymmetric_tube();
    let turned = rotated_about_z(&tube, 20.0);
    let mut cfg = RegistrationConfig::with_iters(500);
    cfg.learning_rate = 3e-3;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let rigid = single.install(|| register(&tube, &turned, &cfg)).unwrap();
    let diag_b = turned.bbox_diagonal();
    let ratio_b = rigid.final_chamfer / diag_b;
    let b = ratio_b < 1e-4 && rigid.iterations <= 500 && rigid.wall_time_secs < 30.0;

    let (src, bent) = bent_cylinder_pair(4, 7);
    let mut cfg = RegistrationConfig::with_iters(500);
    cfg.rng_seed = 7;
    let bend = register(&src, &bent, &cfg).unwrap();
    let ratio_c = bend.final_chamfer / bent.bbox_diagonal();
    let c = ratio_c < 1e-3;
    Outcome::new(
        a && b && c,
        format!(
            "(a) self Chamfer {:.1e}; (b) 20deg rigid Chamfer/diag {ratio_b:.1e} in {} iters, {:.1} s on 1 thread; \
             (c) bent cylinder Chamfer/diag {ratio_c:.1e}",
            own.final_chamfer, rigid.iterations, rigid.wall_time_secs
        ),
    )
}

fn eiae_check() -> Outcome {
    let cfg = ToyConfig::default();
    let mut ablation = cfg.clone();
    ablation.weights.lambda_f = 0.0;
    let (full, ablated) = std::thread::scope(|s| {
        let a = s.spawn(|| train_eiae(&cfg));
        let b = s.spawn(|| train_eiae(&ablation));
        (a.join().unwrap().unwrap(), b.join().unwrap().unwrap())
    });
    let beta = cfg.weights.beta;
    let m = evaluate(&full.encoder, &full.decoder, &cfg.family, beta).unwrap();
    let ab = evaluate(&ablated.encoder, &ablated.decoder, &cfg.family, beta).unwrap();
    let (enc, dec, _) = init_networks(&cfg).unwrap();
    let untrained = evaluate(&enc, &dec, &cfg.family, beta).unwrap();
    Outcome::new(
        m.bounded_mmd == 0.0 && m.raw_mmd <= 0.01 && m.accuracy >= 0.9 && ab.accuracy <= 0.2,
        format!(
            "trained raw MMD {:.4} (bounded {:.4}), accuracy {:.1}%; ablation raw MMD {:.4}, accuracy {:.1}%; \
             untrained accuracy {:.1}%",
            m.raw_mmd,
            m.bounded_mmd,
            100.0 * m.accuracy,
            ab.raw_mmd,
            100.0 * ab.accuracy,
            100.0 * untrained.accuracy
        ),
    )
}

fn oracle_equivalences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut chamfer_equal = 0;
    for _ in 0..200 {
        let (na, nb) = (rng.random_range(1..150), rng.random_range(1..150));
        let a = random_points(&mut rng, na);
        let b = random_points(&mut rng, nb);
        let (t, f) = (chamfer(&a, &b).unwrap(), chamfer_brute_force(&a, &b).unwrap());
        if t.value == f.value && t.grad == f.grad {
            chamfer_equal += 1;
        }
    }

    let mut knn_equal = 0;
    let trials = 50;
    for _ in 0..trials {
        let n = rng.random_range(4..60);
        let nodes = random_points(&mut rng, n);
        let verts = random_points(&mut rng, 100);
        let k = rng.random_range(1..=4);
        let table = bind_knn(&verts, &nodes, k).unwrap();
        let exhaustive = verts.iter().enumerate().all(|(v, p)| {
            let mut order: Vec<(usize, f64)> = nodes.iter().map(|n| (n - p).norm_squared()).enumerate().collect();
            order.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            let ids: Vec<usize> = order[..k].iter().map(|o| o.0).collect();
            let pos: Vec<Point3> = ids.iter().map(|&i| nodes[i]).collect();
            table.controls[v] == ids && table.weights[v] == compute_weights(p, &pos)
        });
        if exhaustive {
            knn_equal += 1;
        }
    }

    let kernel = KernelConfig::default();
    let mut total_err = 0.0f64;
    for seed in 0..20 {
        let mesh = shapes::icosphere(1);
        let r = rig(&mesh, 3, seed, BindingMethod::Trace).unwrap();
        let mut g = r.graph;
        let theta = jitter(&mut rng, &g.flat_params(), 0.2);
        g.set_flat_params(&theta).unwrap();
        let deformed = apply_ed(mesh.vertices(), &g, &r.binding).unwrap();
        let target = random_points(&mut rng, 60);
        let cycled = unflatten(&jitter(&mut rng, &flatten(mesh.vertices()), 0.05));
        let x = FeatureSet::new(DMatrix::from_fn(7, 4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let y = FeatureSet::new(DMatrix::from_fn(5, 4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let w = LossWeights {
            lambda_edge: rng.random_range(0.0..1.0),
            lambda_lap: rng.random_range(0.0..1.0),
            lambda_arap: rng.random_range(0.0..1.0),
            lambda_f: rng.random_range(0.0..1.0),
            beta: 0.01,
            use_cycle: seed % 2 == 0,
        };
        let got = total_loss(
            &LossInputs {
                source: &mesh,
                deformed: &deformed,
                target: &target,
                target_tree: None,
                graph: &g,
                cycled: Some(&cycled),
                features: Some((&x, &y)),
                kernel: &kernel,
            },
            &w,
        )
        .unwrap()
        .total;
        let cyc = if w.use_cycle {
            cycled.iter().zip(mesh.vertices()).map(|(c, v)| (c - v).norm_squared()).sum::<f64>() / cycled.len() as f64
        } else {
            0.0
        };
        let raw = mmd(&x, &y, &kernel).unwrap().0;
        let expect = (cyc + chamfer_brute_force(&deformed, &target).unwrap().value)
            + (w.lambda_edge * edge_loss(&mesh, &deformed).unwrap().loss.value
                + w.lambda_lap * laplacian_loss(&mesh, &deformed).unwrap().value
                + w.lambda_arap * arap(&g).unwrap().0)
            + w.lambda_f * (raw - w.beta).max(0.0);
        total_err = total_err.max((got - expect).abs() / expect.abs().max(1.0));
    }
    Outcome::new(
        chamfer_equal == 200 && knn_equal == trials && total_err <= 1e-12,
        format!(
            "tree Chamfer identical on {chamfer_equal}/200; knn exhaustive on {knn_equal}/{trials}; \
             total_loss term recomputation err {total_err:.1e}"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("gradient suite", gradient_suite),
        ("ED invariants", ed_invariants),
        ("MMD oracle", mmd_oracle),
        ("hierarchy", hierarchy_check),
        ("binding comparison", binding_comparison),
        ("registration", registration_check),
        ("EI-AE toy", eiae_check),
        ("oracle equivalences", oracle_equivalences),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {} [{:.1} s]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
