//! First tower eigenfrequency by the transfer-matrix method and the chain
//! to an equivalent tower-top spring.
//!
//! cargo run --example tower_stiffness [tower.csv]

use tswind::structural::{first_eigenfrequency, tower_stiffness, BeamSegment, TowerModel, CANTILEVER_ROOT};

fn main() -> tswind::Result<()> {
    let tower = match std::env::args().nth(1) {
        Some(p) => TowerModel::from_path(p)?,
        None => TowerModel::default(),
    };
    let s = tower_stiffness(&tower)?;
    println!("omega1  = {:.4} rad/s", s.omega1);
    println!("B_total = {:.4e} N m^2", s.b_total);
    println!("k       = {:.4e} N/m", s.k_spring);

    // uniform cantilever against its closed form
    let (l, mu, ei) = (87.6, 3968.5, 4.4e11);
    let uniform = TowerModel::new(vec![BeamSegment::new(l, mu, ei)?], 0.0)?;
    let exact = CANTILEVER_ROOT.powi(2) * (ei / (mu * l.powi(4))).sqrt();
    println!("uniform check: {:.6} vs {:.6} rad/s", first_eigenfrequency(&uniform)?, exact);
    Ok(())
}
