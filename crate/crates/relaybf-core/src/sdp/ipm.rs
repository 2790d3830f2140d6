//! Infeasible-start primal-dual interior-point method for dense Hermitian
//! SDPs, in complex arithmetic (no real embedding).
//!
//! Direction: HKM with Mehrotra predictor-corrector. Inequalities get
//! nonnegative slack scalars; the optional free scalar is carried through
//! the Schur complement by block elimination. Infeasibility / unboundedness
//! are reported when a (scaled) Farkas-type ray is detected, which is the
//! standard divergence heuristic for infeasible-start methods.
//!
//! Setting `RELAYBF_IPM_TRACE=1` prints per-iteration residuals to stderr.

use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::sdp::{SdpOptions, SdpProblem, SdpSolution, SdpStatus, Sense};

/// Sign of the slack in `<A,X> + sigma*w = b`: +1 for Le, -1 for Ge, 0 for Eq.
fn slack_sign(sense: Sense) -> f64 {
    match sense {
        Sense::Le => 1.0,
        Sense::Ge => -1.0,
        Sense::Eq => 0.0,
    }
}

struct Iterate {
    x: HermitianMatrix,
    z: HermitianMatrix,
    y: Vec<f64>,
    w: Vec<f64>, // slack values, 0 on equality rows
    s: Vec<f64>, // dual slack scalars, 0 on equality rows
    tau: f64,
}

struct Direction {
    dx: HermitianMatrix,
    dz: HermitianMatrix,
    dy: Vec<f64>,
    dw: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
}

/// Normalized Farkas-ray test for primal infeasibility: the scaled dual
/// direction must be an (approximate) certificate `-A*(y) ⪰ 0`, correct
/// slack signs, `b·y > 0`.
fn dual_ray_certifies(problem: &SdpProblem, sigmas: &[f64], y: &[f64], dobj: f64) -> bool {
    let n = problem.dim();
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(y_norm > 0.0) || dobj <= 0.0 {
        return false;
    }
    let mut ray = HermitianMatrix::zeros(n);
    for (j, con) in problem.constraints.iter().enumerate() {
        ray = ray.add(&con.matrix.scale(-y[j] / y_norm));
    }
    let ray_psd = ray.min_eigenvalue().unwrap_or(-1.0) > -1e-6;
    let signs_ok = (0..y.len()).all(|j| sigmas[j] * y[j] / y_norm < 1e-6);
    ray_psd && signs_ok && dobj / y_norm > 1e-10
}

/// Normalized improving-ray test for unboundedness.
fn primal_ray_certifies(problem: &SdpProblem, x: &HermitianMatrix, pobj: f64) -> bool {
    let x_norm = x.frobenius_norm();
    if !(x_norm > 0.0) || pobj >= 0.0 {
        return false;
    }
    let dir = x.scale(1.0 / x_norm);
    let along_ok = problem.constraints.iter().all(|con| {
        let v = con.matrix.inner_product(&dir);
        match con.sense {
            Sense::Le => v < 1e-6,
            Sense::Ge => v > -1e-6,
            Sense::Eq => v.abs() < 1e-6,
        }
    });
    along_ok && problem.objective.inner_product(&dir) < -1e-10
}

pub(super) fn solve(problem: &SdpProblem, options: &SdpOptions) -> SdpSolution {
    let n = problem.dim();
    let m = problem.constraints.len();
    let sigmas: Vec<f64> = problem
        .constraints
        .iter()
        .map(|c| slack_sign(c.sense))
        .collect();
    let n_ineq = sigmas.iter().filter(|&&s| s != 0.0).count();
    let b: Vec<f64> = problem.constraints.iter().map(|c| c.rhs).collect();
    let g: Vec<f64> = problem.constraints.iter().map(|c| c.tau_coeff).collect();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = problem.objective.frobenius_norm();
    let a_norm_max = problem
        .constraints
        .iter()
        .map(|c| c.matrix.frobenius_norm())
        .fold(0.0f64, f64::max);

    // Starting point: scaled identities well inside the cones.
    let beta_p = 10f64.max(
        1.5 * problem
            .constraints
            .iter()
            .map(|c| c.rhs.abs() / (1.0 + c.matrix.frobenius_norm()))
            .fold(0.0f64, f64::max),
    );
    let beta_d = 10f64.max(1.5 * (c_norm + a_norm_max + problem.tau_objective.abs()));
    let mut it = Iterate {
        x: HermitianMatrix::identity(n).scale(beta_p),
        z: HermitianMatrix::identity(n).scale(beta_d),
        y: vec![0.0; m],
        w: sigmas
            .iter()
            .map(|&s| if s != 0.0 { beta_p } else { 0.0 })
            .collect(),
        s: sigmas
            .iter()
            .map(|&s| if s != 0.0 { beta_d } else { 0.0 })
            .collect(),
        tau: 0.0,
    };

    let mut best: Option<(f64, SdpSolution)> = None;
    let mut iterations = 0;
    let mut stall = 0usize;

    for iter in 0..options.max_iter {
        iterations = iter;

        // Residuals.
        let rp: Vec<f64> = (0..m)
            .map(|j| {
                b[j] - problem.constraints[j].matrix.inner_product(&it.x)
                    - sigmas[j] * it.w[j]
                    - g[j] * it.tau
            })
            .collect();
        let mut rd = problem.objective.sub(&it.z);
        for (j, con) in problem.constraints.iter().enumerate() {
            if it.y[j] != 0.0 {
                rd = rd.sub(&con.matrix.scale(it.y[j]));
            }
        }
        let rs: Vec<f64> = (0..m)
            .map(|j| {
                if sigmas[j] != 0.0 {
                    -sigmas[j] * it.y[j] - it.s[j]
                } else {
                    0.0
                }
            })
            .collect();
        let rf = if problem.has_tau {
            problem.tau_objective - g.iter().zip(&it.y).map(|(gj, yj)| gj * yj).sum::<f64>()
        } else {
            0.0
        };

        let pobj = problem.objective.inner_product(&it.x) + problem.tau_objective * it.tau;
        let dobj: f64 = b.iter().zip(&it.y).map(|(bj, yj)| bj * yj).sum();
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + b_norm);
        let dinf = (rd.frobenius_norm() + rs.iter().map(|v| v * v).sum::<f64>().sqrt() + rf.abs())
            / (1.0 + c_norm);

        let merit = gap.max(pinf).max(dinf);
        if std::env::var_os("RELAYBF_IPM_TRACE").is_some() {
            eprintln!(
                "ipm iter={iter} pobj={pobj:.6e} dobj={dobj:.6e} gap={gap:.3e} pinf={pinf:.3e} dinf={dinf:.3e}"
            );
        }
        let make_solution = |status: SdpStatus, it: &Iterate| SdpSolution {
            x: it.x.clone(),
            tau: problem.has_tau.then_some(it.tau),
            dual: it.y.clone(),
            status,
            primal_objective: pobj,
            dual_objective: dobj,
            gap,
            iterations: iter,
        };
        if best.as_ref().map_or(true, |(bm, _)| merit < 0.9 * *bm) {
            stall = 0;
        } else {
            stall += 1;
        }
        if best.as_ref().map_or(true, |(bm, _)| merit < *bm) {
            best = Some((merit, make_solution(SdpStatus::MaxIter, &it)));
        }

        if merit <= options.tol {
            return make_solution(SdpStatus::Optimal, &it);
        }
        // Numerical floor: no meaningful progress for several rounds.
        if stall >= 8 {
            break;
        }

        // Divergence heuristics: an exploding dual with a Farkas-like ray
        // certifies primal infeasibility; the mirrored test certifies
        // unboundedness. The ray tests themselves reject false alarms, so
        // the triggers are deliberately early.
        let y_norm = it.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if y_norm > 1e4 * (1.0 + c_norm)
            && dobj > 1e3 * (1.0 + c_norm)
            && dual_ray_certifies(problem, &sigmas, &it.y, dobj)
        {
            return make_solution(SdpStatus::Infeasible, &it);
        }
        let x_norm = it.x.frobenius_norm();
        if x_norm > 1e4 * (1.0 + beta_p)
            && pobj < -1e3 * (1.0 + c_norm)
            && primal_ray_certifies(problem, &it.x, pobj)
        {
            return make_solution(SdpStatus::Unbounded, &it);
        }

        let mu = (it.x.inner_product(&it.z)
            + it.w.iter().zip(&it.s).map(|(w, s)| w * s).sum::<f64>())
            / (n + n_ineq) as f64;

        // Factor Z and X once per iteration.
        let z_chol = match it.z.cholesky() {
            Ok(f) => f,
            Err(_) => break,
        };
        let x_chol = match it.x.cholesky() {
            Ok(f) => f,
            Err(_) => break,
        };
        let z_inv = z_chol.inverse();

        // Schur complement S_jk = Re tr(A_j X A_k Z^{-1}) + diag(w/s).
        let u_mats: Vec<ComplexMatrix> = problem
            .constraints
            .iter()
            .map(|con| {
                it.x.as_matrix()
                    .matmul(con.matrix.as_matrix())
                    .matmul(z_inv.as_matrix())
            })
            .collect();
        let mut schur = vec![0.0f64; m * m];
        for j in 0..m {
            for k in 0..m {
                let aj = problem.constraints[j].matrix.as_matrix();
                let uk = &u_mats[k];
                let mut acc = 0.0;
                for c in 0..n {
                    for r in 0..n {
                        let a = aj.get(r, c);
                        let u = uk.get(c, r);
                        acc += a.re * u.re - a.im * u.im;
                    }
                }
                schur[j * m + k] = acc;
            }
        }
        // Symmetrize against round-off and add the slack diagonal.
        for j in 0..m {
            for k in (j + 1)..m {
                let v = 0.5 * (schur[j * m + k] + schur[k * m + j]);
                schur[j * m + k] = v;
                schur[k * m + j] = v;
            }
            if sigmas[j] != 0.0 {
                schur[j * m + j] += it.w[j] / it.s[j];
            }
        }
        let schur_factor = match factor_spd(schur, m) {
            Some(f) => f,
            None => break,
        };

        let newton = |sigma_mu: f64,
                      corr_x: Option<&HermitianMatrix>,
                      corr_w: Option<&[f64]>|
         -> Direction {
            // Ecap = sigma_mu Z^{-1} - X - H(X Rd Z^{-1}) - corr_x
            let xrz =
                it.x.as_matrix()
                    .matmul(rd.as_matrix())
                    .matmul(z_inv.as_matrix());
            let mut ecap = z_inv
                .scale(sigma_mu)
                .sub(&it.x)
                .sub(&HermitianMatrix::new(&xrz));
            if let Some(cx) = corr_x {
                ecap = ecap.sub(cx);
            }

            let mut h = vec![0.0f64; m];
            for j in 0..m {
                let mut t_j = 0.0;
                if sigmas[j] != 0.0 {
                    let cw = corr_w.map_or(0.0, |c| c[j]);
                    t_j = sigmas[j]
                        * ((sigma_mu - it.w[j] * it.s[j] - cw) / it.s[j]
                            - (it.w[j] / it.s[j]) * rs[j]);
                }
                h[j] = rp[j] - problem.constraints[j].matrix.inner_product(&ecap) - t_j;
            }

            let (dy, dtau) = if problem.has_tau {
                let u = solve_spd(&schur_factor, m, &h);
                let v = solve_spd(&schur_factor, m, &g);
                let gv: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
                let gu: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
                let dtau = if gv.abs() > 1e-300 {
                    (gu - rf) / gv
                } else {
                    0.0
                };
                let dy: Vec<f64> = u.iter().zip(&v).map(|(ui, vi)| ui - dtau * vi).collect();
                (dy, dtau)
            } else {
                (solve_spd(&schur_factor, m, &h), 0.0)
            };

            let mut dz = rd.clone();
            for (j, con) in problem.constraints.iter().enumerate() {
                if dy[j] != 0.0 {
                    dz = dz.sub(&con.matrix.scale(dy[j]));
                }
            }
            // dX = sigma_mu Z^{-1} - X - H(X dZ Z^{-1}) - corr_x
            let xdz =
                it.x.as_matrix()
                    .matmul(dz.as_matrix())
                    .matmul(z_inv.as_matrix());
            let mut dx = z_inv
                .scale(sigma_mu)
                .sub(&it.x)
                .sub(&HermitianMatrix::new(&xdz));
            if let Some(cx) = corr_x {
                dx = dx.sub(cx);
            }

            let mut ds = vec![0.0f64; m];
            let mut dw = vec![0.0f64; m];
            for j in 0..m {
                if sigmas[j] != 0.0 {
                    ds[j] = rs[j] - sigmas[j] * dy[j];
                    let cw = corr_w.map_or(0.0, |c| c[j]);
                    dw[j] = (sigma_mu - it.w[j] * it.s[j] - cw - it.w[j] * ds[j]) / it.s[j];
                }
            }
            Direction {
                dx,
                dz,
                dy,
                dw,
                ds,
                dtau,
            }
        };

        // Predictor.
        let aff = newton(0.0, None, None);
        let ap_aff = step_length(&x_chol, &aff.dx, &it.w, &aff.dw, &sigmas).min(1.0);
        let ad_aff = step_length(&z_chol, &aff.dz, &it.s, &aff.ds, &sigmas).min(1.0);
        let mut gap_aff = 0.0;
        {
            let xn = it.x.add(&aff.dx.scale(ap_aff));
            let zn = it.z.add(&aff.dz.scale(ad_aff));
            gap_aff += xn.inner_product(&zn);
            for j in 0..m {
                if sigmas[j] != 0.0 {
                    gap_aff += (it.w[j] + ap_aff * aff.dw[j]) * (it.s[j] + ad_aff * aff.ds[j]);
                }
            }
        }
        let mu_aff = gap_aff.max(0.0) / (n + n_ineq) as f64;
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-8, 1.0);

        // Corrector.
        let corr_x = HermitianMatrix::new(
            &aff.dx
                .as_matrix()
                .matmul(aff.dz.as_matrix())
                .matmul(z_inv.as_matrix()),
        );
        let corr_w: Vec<f64> = (0..m)
            .map(|j| {
                if sigmas[j] != 0.0 {
                    aff.dw[j] * aff.ds[j]
                } else {
                    0.0
                }
            })
            .collect();
        let dir = newton(sigma * mu, Some(&corr_x), Some(&corr_w));

        let eta = 0.98;
        let mut ap = (eta * step_length(&x_chol, &dir.dx, &it.w, &dir.dw, &sigmas)).min(1.0);
        let mut ad = (eta * step_length(&z_chol, &dir.dz, &it.s, &dir.ds, &sigmas)).min(1.0);
        if problem.has_tau {
            // The free scalar couples primal and dual blocks; equal steps
            // keep the Newton system consistent.
            let a = ap.min(ad);
            ap = a;
            ad = a;
        }

        it.x = it.x.add(&dir.dx.scale(ap));
        it.tau += ap * dir.dtau;
        it.z = it.z.add(&dir.dz.scale(ad));
        for j in 0..m {
            it.y[j] += ad * dir.dy[j];
            if sigmas[j] != 0.0 {
                it.w[j] += ap * dir.dw[j];
                it.s[j] += ad * dir.ds[j];
            }
        }
    }

    // Ran out of iterations or hit a numerical wall. If the last iterate
    // carries a divergence certificate, report that; otherwise flag the
    // best iterate MaxIter.
    let (_, mut sol) = best.expect("at least one iterate");
    let pobj = problem.objective.inner_product(&it.x) + problem.tau_objective * it.tau;
    let dobj: f64 = b.iter().zip(&it.y).map(|(bj, yj)| bj * yj).sum();
    if dobj > 10.0 * (1.0 + pobj.abs()) && dual_ray_certifies(problem, &sigmas, &it.y, dobj) {
        sol.status = SdpStatus::Infeasible;
    } else if pobj < -10.0 * (1.0 + dobj.abs()) && primal_ray_certifies(problem, &it.x, pobj) {
        sol.status = SdpStatus::Unbounded;
    } else {
        sol.status = SdpStatus::MaxIter;
    }
    sol.iterations = iterations;
    sol
}

/// Largest step in `(0, inf)` keeping `X + a dX` PSD and slacks nonnegative.
fn step_length(
    chol: &crate::linalg::CholeskyFactor,
    dx: &HermitianMatrix,
    w: &[f64],
    dw: &[f64],
    sigmas: &[f64],
) -> f64 {
    let white = chol.whiten(dx);
    let mut alpha = match white.eig() {
        Ok((vals, _)) => {
            let lam_min = *vals.last().unwrap();
            if lam_min >= -1e-14 {
                f64::INFINITY
            } else {
                -1.0 / lam_min
            }
        }
        Err(_) => 0.0,
    };
    for j in 0..w.len() {
        if sigmas[j] != 0.0 && dw[j] < 0.0 {
            alpha = alpha.min(-w[j] / dw[j]);
        }
    }
    alpha
}

/// Dense Cholesky of a real SPD matrix (row-major), with escalating ridge
/// regularization for nearly singular Schur complements.
fn factor_spd(mut a: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    if m == 0 {
        return Some(a);
    }
    let trace: f64 = (0..m).map(|i| a[i * m + i]).sum();
    let mut ridge = 0.0;
    for attempt in 0..8 {
        if attempt > 0 {
            ridge = if ridge == 0.0 {
                1e-13 * (trace / m as f64).max(1e-300)
            } else {
                ridge * 100.0
            };
        }
        let mut l = a.clone();
        for i in 0..m {
            l[i * m + i] += ridge;
        }
        if cholesky_in_place(&mut l, m) {
            return Some(l);
        }
        if attempt == 7 {
            break;
        }
        a = a.clone();
    }
    None
}

fn cholesky_in_place(a: &mut [f64], m: usize) -> bool {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        let dj = d.sqrt();
        a[j * m + j] = dj;
        for i in (j + 1)..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / dj;
        }
    }
    true
}

fn solve_spd(l: &[f64], m: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            x[i] -= l[i * m + k] * x[k];
        }
        x[i] /= l[i * m + i];
    }
    for i in (0..m).rev() {
        for k in (i + 1)..m {
            x[i] -= l[k * m + i] * x[k];
        }
        x[i] /= l[i * m + i];
    }
    x
}
