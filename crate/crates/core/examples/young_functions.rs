//! Young functions, Luxemburg norms, complementary functions and the
//! integrability diagnostic.
//!
//! cargo run --example young_functions

use strongmax::young::{
    check_bstar_p, check_ladder, complementary, generalized_holder_check, luxemburg_norm_values,
    phi_n, phi_n_iterate, DEFAULT_T_MAX,
};
use strongmax::{GridFunction, Rect, YoungFunction};

fn main() -> strongmax::Result<()> {
    let values = [0.5, 2.0, 8.0, 0.0];
    for psi in YoungFunction::named_catalog() {
        let norm = luxemburg_norm_values(&values, &psi, 1e-12)?;
        let clean = check_ladder(&psi).is_clean();
        println!("{:<10} Ψ(2) = {:<10.5} ‖v‖_Ψ = {norm:<10.6} ladder clean: {clean}", psi.to_string(), psi.eval(2.0));
    }

    println!("Φ_2(e) = {:.6}, Φ_2∘Φ_2(3) = {:.6}", phi_n(2, std::f64::consts::E), phi_n_iterate(2, 2, 3.0));

    // Power(2) is self-dual up to a factor: sup_t (st - t^2) = s^2 / 4.
    let s = 3.0;
    println!("conjugate of t^2 at {s}: {:.9} (s^2/4 = {})", complementary(&YoungFunction::Power(2.0), s, DEFAULT_T_MAX)?, s * s / 4.0);

    for (psi, p) in [(YoungFunction::LLogK(1.0), 2.0), (YoungFunction::Power(2.0), 2.0), (YoungFunction::Power(2.0), 3.0)] {
        let d = check_bstar_p(&psi, p, 2, 1.0, DEFAULT_T_MAX)?;
        println!("{psi} at p = {p}: {:?} (tail exponent {:.3})", d.verdict, d.tail_exponent);
    }

    let f = GridFunction::from_fn(&[4, 4], 1.0 / 16.0, |p| (p[0] * p[1]) as f64)?;
    let g = GridFunction::from_fn(&[4, 4], 1.0 / 16.0, |p| 1.0 + p[0] as f64)?;
    let r = Rect::from_bounds(&[0, 0], &[4, 4])?;
    let h = generalized_holder_check(&f, &g, &r, &YoungFunction::LLogK(1.0), 1e-10, DEFAULT_T_MAX)?;
    println!("Hölder: mean |fg| = {:.4}, ratio = {:.4} (at most 2)", h.mean_product, h.ratio);
    Ok(())
}
