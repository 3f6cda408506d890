//! Verifies the reverse-mode gradients against finite differences.
//!
//! First each primitive op is checked in isolation on small random tensors,
//! then the full attention network's training loss is checked end to end at
//! 64-bit precision with respect to every parameter tensor. The composite
//! check uses a larger step than the per-op ones: a big step straddles relu
//! kinks deep in the network, a tiny one loses small gradients to round-off,
//! and 1e-4 sits comfortably between both failure modes here.
//!
//! ```text
//! cargo run --example gradcheck
//! ```

use csiloc::autodiff::{grad_check, Graph, NodeId, Tensor};
use csiloc::model::{input_views, ModelConfig, Network};
use csiloc::seed::stream_rng;
use rand::Rng;

fn random_tensor(rows: usize, cols: usize, tag: u64) -> Tensor<f64> {
    let mut rng = stream_rng(99, 0x4744_4348, tag);
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::from_vec(rows, cols, data).unwrap()
}

fn main() -> csiloc::Result<()> {
    println!("per-op gradient checks (3x4 inputs, eps 1e-6):");
    let x = random_tensor(3, 4, 0);
    let target = random_tensor(3, 4, 1);
    let w = random_tensor(4, 3, 2);
    let bias = random_tensor(1, 4, 3);

    type Build = Box<dyn Fn(&mut Graph<f64>, NodeId) -> csiloc::Result<NodeId>>;
    let mse_to = |g: &mut Graph<f64>, y: NodeId, t: &Tensor<f64>| {
        let tid = g.constant(t.clone());
        g.mse(y, tid)
    };
    let t1 = target.clone();
    let t2 = random_tensor(3, 3, 4);
    let t3 = target.clone();
    let t4 = target.clone();
    let t5 = random_tensor(4, 3, 5);
    let t6 = random_tensor(1, 4, 6);
    let t7 = random_tensor(3, 4, 7);
    let t8 = random_tensor(12, 1, 8);
    let w2 = w.clone();
    let b2 = bias.clone();
    let cases: Vec<(&str, Build)> = vec![
        ("relu", Box::new(move |g, x| {
            let y = g.relu(x)?;
            mse_to(g, y, &t1)
        })),
        ("matmul", Box::new(move |g, x| {
            let wid = g.constant(w2.clone());
            let y = g.matmul(x, wid)?;
            mse_to(g, y, &t2)
        })),
        ("add", Box::new(move |g, x| {
            let other = g.constant(t3.clone());
            let y = g.add(x, other)?;
            mse_to(g, y, &t4)
        })),
        ("add_bias", Box::new(move |g, x| {
            let b = g.constant(b2.clone());
            let y = g.add_bias(x, b)?;
            mse_to(g, y, &t7)
        })),
        ("softmax_rows", Box::new(move |g, x| {
            let y = g.softmax_rows(x)?;
            let t = g.constant(random_tensor(3, 4, 9));
            g.mse(y, t)
        })),
        ("transpose", Box::new(move |g, x| {
            let y = g.transpose(x)?;
            mse_to(g, y, &t5)
        })),
        ("reshape", Box::new(move |g, x| {
            let y = g.reshape(x, 12, 1)?;
            mse_to(g, y, &t8)
        })),
        ("mean_rows", Box::new(move |g, x| {
            let y = g.mean_rows(x)?;
            mse_to(g, y, &t6)
        })),
        ("scale", Box::new(move |g, x| {
            let y = g.scale(x, 0.37)?;
            let t = g.constant(random_tensor(3, 4, 10));
            g.mse(y, t)
        })),
    ];
    for (name, build) in &cases {
        let report = grad_check(build, &x, 1e-6)?;
        println!(
            "  {name:<13} max rel err {:.2e}  (worst at {:?})",
            report.max_rel_error, report.worst_index
        );
        assert!(report.max_rel_error < 1e-5);
    }

    // End to end: d(loss)/d(theta) for every tensor of a tiny adn.
    println!("\nfull-network check (4x4 CSI, d=4, eps 1e-4):");
    let cfg = ModelConfig {
        d_sub: 4,
        d_ant: 4,
        head_widths: vec![8],
        ..ModelConfig::adn(4, 4, 5)
    };
    let net: Network<f64> = Network::init(cfg)?;
    let mut rng = stream_rng(99, 0x4744_4348, 42);
    let mut sample = csiloc::dataset::CsiSample {
        csi: csiloc::dataset::CsiMatrix::zeros(4, 4),
        position: [1.25, 2.5],
        scenario_id: 0,
    };
    for z in sample.csi.entries_mut() {
        *z = num_complex::Complex32::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let normalizer = csiloc::dataset::Normalizer { scale: 1.0 };
    let (sub, ant) = input_views::<f64>(&sample, &normalizer);
    let target = Tensor::from_vec(1, 2, vec![1.25, 2.5])?;

    let mut worst: f64 = 0.0;
    for (pi, name) in net.names().iter().enumerate() {
        let report = grad_check(
            |g, xid| {
                let mut ids: Vec<NodeId> =
                    net.params().iter().map(|p| g.constant(p.clone())).collect();
                ids[pi] = xid;
                let sv = g.constant(sub.clone());
                let av = g.constant(ant.clone());
                let out = net.forward_from(g, &ids, sv, av)?;
                let t = g.constant(target.clone());
                let m = g.mse(out.pred, t)?;
                g.scale(m, 2.0)
            },
            &net.params()[pi],
            1e-4,
        )?;
        println!(
            "  {name:<13} {:>4} entries, max rel err {:.2e}",
            report.entries, report.max_rel_error
        );
        worst = worst.max(report.max_rel_error);
        assert!(report.max_rel_error < 1e-4, "{name}: {report:?}");
    }
    println!("\nworst over all tensors: {worst:.2e} (< 1e-4)");
    Ok(())
}
