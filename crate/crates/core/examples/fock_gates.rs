//! Builds the gate set at the training cutoff and compares it with closed forms.
//!
//! cargo run --example fock_gates

use photonic_ppo::fock::{
    apply_gate, beamsplitter_gate, coherent_amplitude, displacement_gate, gates_selftest, kerr_gate,
    quadrature_expectation, rotation_gate, squeezed_vacuum_amplitude, squeezing_gate, FockState, Modes, SimConfig,
};

fn main() -> anyhow::Result<()> {
    let one = SimConfig::new(1, 16)?;

    println!("D(1.0, 0.3)|0> against the coherent state:");
    let d = displacement_gate(1.0, 0.3, &one)?;
    for n in 0..6 {
        let got = d.entries[[n, 0]];
        let want = coherent_amplitude(1.0, 0.3, n);
        println!("  n={n}  {:+.12} {:+.12}i   |err| {:.1e}", got.re, got.im, (got - want).norm());
    }

    println!("S(0.5, 0)|0> against the squeezed vacuum:");
    let s = squeezing_gate(0.5, 0.0, &one)?;
    for n in 0..6 {
        println!("  n={n}  {:+.12}  closed form {:+.12}", s.entries[[n, 0]].re, squeezed_vacuum_amplitude(0.5, n));
    }

    println!(
        "unitarity defect: rotation {:.1e}, Kerr {:.1e}",
        rotation_gate(0.7, &one).unitarity_defect(),
        kerr_gate(0.7, &one).unitarity_defect()
    );
    // Projected gates lose norm only on columns near the cutoff.
    println!(
        "displacement column norms: n=0 {:.12}, n=15 {:.6}",
        d.column_norm(0),
        d.column_norm(15)
    );

    let two = SimConfig::new(2, 16)?;
    let mut state = FockState::vacuum(two);
    state = apply_gate(&state, &displacement_gate(1.0, 0.0, &two)?, Modes::Single(0))?;
    let bs = beamsplitter_gate(std::f64::consts::FRAC_PI_4, 0.0, &two)?;
    state = apply_gate(&state, &bs, Modes::Pair(0, 1))?;
    println!(
        "50:50 beamsplitter on |alpha=1>|0>: <n_0> {:.6}, <n_1> {:.6}, <X_0> {:.6}, norm {:.12}",
        state.mean_photon_number(0)?,
        state.mean_photon_number(1)?,
        quadrature_expectation(&state, 0, 0.0)?,
        state.norm_sqr()
    );

    println!("self-test:");
    for c in gates_selftest() {
        println!("  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
