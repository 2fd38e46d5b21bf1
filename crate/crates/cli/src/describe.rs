//! Kernel catalog descriptions for the `describe` subcommand.

use anyhow::{bail, Result};

pub fn describe(kernel: &str) -> Result<String> {
    let text = match kernel {
        "poisson" => {
            "poisson — constant kernel\n\
             \n\
             Formula:     π(μ, ·) = ρ\n\
             Parameters:  rho — nonnegative weight per site\n\
             Process:     Poisson with intensity ρ; per-site counts Poisson(ρ_x)\n\
             Postulates:  A1 pass, A2 pass, J pass, J' pass, BC pass,\n\
             \x20            D pass for every merge\n\
             Simplicity:  fails wherever ρ has an atom (always on a finite\n\
             \x20            space with positive weights)\n"
        }
        "polya_sum" => {
            "polya_sum — reinforcing kernel\n\
             \n\
             Formula:     π(μ, ·) = z(ρ + μ),  z in (0,1)\n\
             Parameters:  z — strength in (0,1); rho — nonnegative weight per site\n\
             Process:     Pólya sum; per-site counts negative binomial NB(ρ_x, z)\n\
             Postulates:  A1 pass, A2 pass, J pass, J' pass, BC pass,\n\
             \x20            D pass for every merge\n\
             Simplicity:  fails (observed points reinforce themselves)\n"
        }
        "polya_difference" => {
            "polya_difference — depleting kernel\n\
             \n\
             Formula:     π(μ, ·) = z(ρ − μ) while μ ≤ ρ, zero measure otherwise\n\
             Parameters:  z > 0; rho — integer weight per site (the capacity)\n\
             Process:     Pólya difference; per-site counts Binomial(ρ_x, z/(1+z))\n\
             Postulates:  A1 pass, A2 pass, J pass, J' pass, BC pass,\n\
             \x20            D pass for every merge (on admissible configurations)\n\
             Simplicity:  passes exactly when every ρ_x ≤ 1\n"
        }
        "local_reinforcement" => {
            "local_reinforcement — fixed measure plus per-site increments\n\
             \n\
             Formula:     π(μ, {x}) = ρ({x}) + Σ_{k≤μ(x)} c_x(k), clamped at 0\n\
             Parameters:  rho; c (per-site increment tables) or c_constant;\n\
             \x20            mass_bound — validation range for nonnegativity\n\
             Postulates:  A1 pass, A2 pass, J pass always; J' and BC pass\n\
             \x20            exactly when the increments are one constant c\n\
             \x20            across sites and multiplicities (then the kernel\n\
             \x20            is ρ + cμ: Poisson, Pólya sum or Pólya difference)\n"
        }
        "interaction" => {
            "interaction — pair-interaction kernel\n\
             \n\
             Formula:     positive diagonal:  π(μ,{w}) = V(w,μ)(ρ({w}) + Σ_{k≤μ(w)} c_w(k))\n\
             \x20            vanishing diagonal: π(μ,{w}) = V(w,μ)ρ({w}) + V(w, μ−w)c_w(μ(w))\n\
             \x20            with Boltzmann factor V(w,μ) = Π_z f(w,z)^{μ(z)}\n\
             Parameters:  rho; f — symmetric nonnegative matrix, diagonal either\n\
             \x20            all positive or all zero (mixed rejected); optional c\n\
             Postulates:  A1 pass (f symmetric), A2' pass; A2/J/J'/BC fail for\n\
             \x20            nontrivial f\n\
             Simplicity:  with c = 0, passes exactly when the diagonal vanishes\n\
             \x20            (hard core)\n"
        }
        other => bail!("unknown kernel `{other}` (try: poisson, polya_sum, polya_difference, local_reinforcement, interaction)"),
    };
    Ok(text.to_string())
}
