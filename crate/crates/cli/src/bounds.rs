use clap::Args;
use sleeve_core::step::{
    chord_error_bound, chord_error_bound_inexact, delta_h, inexact_feasibility, max_feasible_epsilon,
    max_step_exact, max_step_inexact, step_equation_residual, step_size_exact, step_size_inexact,
    StepError,
};

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long)]
    rho: f64,
    /// Step cap η.
    #[arg(long)]
    eta: Option<f64>,
    /// Previous chord length.
    #[arg(long)]
    h: Option<f64>,
    /// Target error.
    #[arg(long = "target-error", visible_alias = "E")]
    target_error: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

/// Every formula whose inputs are present, as `(name, value)` lines.
pub fn bounds_lines(a: &BoundsArgs) -> Vec<(String, Result<f64, StepError>)> {
    let (rho, eps) = (a.rho, a.epsilon);
    let mut out: Vec<(String, Result<f64, StepError>)> = Vec::new();
    let mut push = |name: &str, v: Result<f64, StepError>| out.push((name.to_string(), v));
    if let Some(h) = a.h {
        push("chord_error_bound", chord_error_bound(rho, h));
        if eps > 0.0 {
            push("chord_error_bound_inexact", chord_error_bound_inexact(rho, h, eps));
            push("delta_h", delta_h(rho, h, eps));
        }
    }
    if let (Some(eta), Some(h)) = (a.eta, a.h) {
        let s = step_size_exact(rho, eta, h);
        if let Ok(s) = &s {
            let s = *s;
            push("s*", Ok(s));
            push("step_equation_residual", Ok(step_equation_residual(rho, eta, h, s)));
        } else {
            push("s*", s);
        }
        if eps > 0.0 {
            match step_size_inexact(rho, eta, h, eps) {
                Ok(st) => {
                    push("eta_tilde", Ok(st.eta_tilde));
                    push("s*_inexact", Ok(st.s));
                    push("step_lower_bound", Ok(st.lower_bound));
                }
                Err(e) => push("s*_inexact", Err(e)),
            }
        }
    }
    if let Some(e) = a.target_error {
        push("eta", max_step_exact(rho, e));
        push("max_feasible_epsilon", max_feasible_epsilon(rho, e));
        if eps > 0.0 {
            push("eta_inexact", max_step_inexact(rho, e, eps));
            match inexact_feasibility(rho, e, eps) {
                Ok(f) => {
                    push("feasibility_lhs", Ok(f.lhs));
                    push("feasibility_rhs", Ok(f.rhs));
                    push("feasible", Ok(f64::from(u8::from(f.feasible))));
                    push("h_tilde", Ok(f.h_tilde));
                }
                Err(err) => push("feasibility", Err(err)),
            }
        }
    }
    out
}

pub fn bounds_command(a: &BoundsArgs) -> u8 {
    let lines = bounds_lines(a);
    if lines.is_empty() {
        eprintln!("error [config]: pass --h, --eta with --h, or --E");
        return 2;
    }
    let mut failed = false;
    for (name, v) in lines {
        match v {
            Ok(v) => println!("{name} = {v}"),
            Err(e) => {
                failed = true;
                println!("{name}: {e}");
            }
        }
    }
    u8::from(failed)
}
