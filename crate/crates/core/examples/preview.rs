use risce_core::harness::{preset, run_monte_carlo};

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn main() {
    let which = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fig4".to_string());
    let spec = preset(&which, true).expect("preset");
    let t0 = std::time::Instant::now();
    let agg = run_monte_carlo(&spec).expect("run");
    eprintln!("elapsed: {:.1}s", t0.elapsed().as_secs_f64());
    println!(
        "{:>8} {:>12} {:>9} {:>9} {:>9} {:>7} {:>12} {:>10} {:>5}",
        "value", "algo", "H dB", "G dB", "E dB", "iters", "flops", "time ms", "nc"
    );
    for r in &agg.rows {
        println!(
            "{:>8.2} {:>12} {:>9.2} {:>9.2} {:>9.2} {:>7.2} {:>12.3e} {:>10.4} {:>5}",
            r.sweep_value,
            r.algorithm.to_string(),
            db(r.nmse_h),
            db(r.nmse_g),
            db(r.nmse_e),
            r.mean_iterations,
            r.flops,
            r.runtime_s * 1e3,
            r.non_converged
        );
    }
    for s in &agg.skipped {
        println!(
            "skipped: {} @ {} (needs K >= {})",
            s.algorithm, s.sweep_value, s.required_k
        );
    }
}
