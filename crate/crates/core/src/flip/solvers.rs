use super::analysis::effective_from_table;
use super::polytope::{Polytope, Row};
use super::{
    Certificate, FlipEquation, FlipError, FlipFamily, FlipSolution, FlipStatus, TieBreak, FEASIBILITY_TOLERANCE,
};
use crate::scenarios::{extended_joint_table, extended_marginals, simple_friend_marginal, Party, ScenarioConfig, Time};

/// Slack granted to an objective once its optimum is known.
const OBJECTIVE_SLACK: f64 = 1e-12;
/// Upper bound on epigraph variables; every objective here is at most 2.
const EPIGRAPH_BOUND: f64 = 4.0;

/// The linear constraints a model of the given family must satisfy.
///
/// Simple-scenario families use the sum and the difference of the two
/// marginal equations; the sum row carries no parameter and only checks
/// normalization. Extended families use one row per cell of the joint table.
pub fn flip_equations(family: FlipFamily, config: &ScenarioConfig) -> Result<Vec<FlipEquation>, FlipError> {
    match family {
        FlipFamily::Single | FlipFamily::Two => {
            let p1 = simple_friend_marginal(config, Time::T1)?.probabilities;
            let p2 = simple_friend_marginal(config, Time::T2)?.probabilities;
            let d = p1[0] - p1[1];
            let difference = match family {
                FlipFamily::Single => vec![-2.0 * d],
                _ => vec![-2.0 * p1[0], 2.0 * p1[1]],
            };
            let zero = vec![0.0; difference.len()];
            Ok(vec![
                FlipEquation {
                    label: "sum".into(),
                    coefficients: zero,
                    rhs: p2[0] + p2[1] - 1.0,
                },
                FlipEquation {
                    label: "difference".into(),
                    coefficients: difference,
                    rhs: (p2[0] - p2[1]) - d,
                },
            ])
        }
        FlipFamily::JointTwo | FlipFamily::Four => {
            let before = extended_joint_table(config, Time::T2)?;
            let after = extended_joint_table(config, Time::T3)?;
            let width = family.parameter_names().len();
            let index = |n: usize, m: usize| if family == FlipFamily::Four { 2 * n + m } else { n };
            let mut rows = Vec::with_capacity(4);
            for f in 0..2 {
                for m in 0..2 {
                    // mass leaving record f minus mass entering it, in Bob's column m
                    let (stay, enter) = (before.get(f, m), before.get(1 - f, m));
                    let mut coefficients = vec![0.0; width];
                    coefficients[index(f, m)] -= stay;
                    coefficients[index(1 - f, m)] += enter;
                    rows.push(FlipEquation {
                        label: format!("p({f},{m})"),
                        coefficients,
                        rhs: after.get(f, m) - stay,
                    });
                }
            }
            Ok(rows)
        }
    }
}

/// Min-max objectives applied in order: each is `max_j |L_j · q|`.
fn objectives(family: FlipFamily) -> Vec<Vec<Vec<f64>>> {
    match family {
        FlipFamily::Single => vec![],
        FlipFamily::Two | FlipFamily::JointTwo => vec![vec![vec![-1.0, 1.0]]],
        FlipFamily::Four => vec![
            // dependence on Bob's result
            vec![vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]],
            // dependence on the old record
            vec![vec![1.0, 0.0, -1.0, 0.0], vec![0.0, 1.0, 0.0, -1.0]],
        ],
    }
}

/// Solves any family. The extended families need Bob's setting.
pub fn solve(family: FlipFamily, config: &ScenarioConfig, tie_break: TieBreak) -> Result<FlipSolution, FlipError> {
    config.validate().map_err(FlipError::from)?;
    let equations = flip_equations(family, config)?;
    let reference = config.record_flip_rate();
    let dim = family.parameter_names().len();
    let rows: Vec<Row> = equations
        .iter()
        .map(|e| Row::new(e.coefficients.clone(), e.rhs))
        .collect();

    let resolved = resolve(dim, &rows, &objectives(family), tie_break, reference);
    let raw = resolved.point;
    let residual = equations.iter().map(|e| e.residual(&raw)).fold(0.0, f64::max);
    let parameters: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let clamp = raw
        .iter()
        .zip(&parameters)
        .map(|(r, p)| (r - p).abs())
        .fold(0.0, f64::max);

    let certificate = resolved.floor.map(|floor| {
        let (equation, violation) = equations
            .iter()
            .map(|e| (e, e.residual(&raw)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("every family has equations");
        Certificate {
            equation: equation.label.clone(),
            violation,
            floor,
        }
    });

    let epsilon = match family {
        FlipFamily::Single => 0.0,
        FlipFamily::Two | FlipFamily::JointTwo => parameters[1] - parameters[0],
        FlipFamily::Four => (parameters[0] - parameters[1])
            .abs()
            .max((parameters[2] - parameters[3]).abs()),
    };

    let mut solution = FlipSolution {
        family,
        parameters,
        status: resolved.status,
        epsilon,
        residual,
        clamp,
        certificate,
        effective: None,
        tie_break,
        reference,
        equations,
    };
    if family == FlipFamily::Four {
        let bob = extended_marginals(config, Party::Bob, Time::T2)?;
        solution.effective = Some(effective_from_table(&solution.flip_table(), &bob.probabilities));
    }
    Ok(solution)
}

/// One flip probability `q` reproducing the friend's marginals in the simple scenario.
pub fn solve_single_flip(config: &ScenarioConfig, tie_break: TieBreak) -> Result<FlipSolution, FlipError> {
    solve(FlipFamily::Single, config, tie_break)
}

/// Record-dependent `(q⁰, q¹)` in the simple scenario, as symmetric as possible.
pub fn solve_outcome_flip(config: &ScenarioConfig, tie_break: TieBreak) -> Result<FlipSolution, FlipError> {
    solve(FlipFamily::Two, config, tie_break)
}

/// Record-dependent `(q⁰, q¹)` reproducing the joint table with Bob after Wigner's measurement.
pub fn solve_joint_flip(config: &ScenarioConfig, tie_break: TieBreak) -> Result<FlipSolution, FlipError> {
    solve(FlipFamily::JointTwo, config, tie_break)
}

/// `qⁿᵐ` conditioned on the old record and Bob's result, depending on Bob's
/// result as little as possible.
pub fn solve_conditional_flip(config: &ScenarioConfig, tie_break: TieBreak) -> Result<FlipSolution, FlipError> {
    solve(FlipFamily::Four, config, tie_break)
}

struct Resolved {
    point: Vec<f64>,
    status: FlipStatus,
    /// Present when infeasible: the smallest achievable largest violation.
    floor: Option<f64>,
}

fn resolve(dim: usize, rows: &[Row], objectives: &[Vec<Vec<f64>>], tie_break: TieBreak, reference: f64) -> Resolved {
    let reference_point = vec![reference; dim];
    let exact = Polytope::boxed(dim, rows).filter(|p| !p.vertices().is_empty());
    let mut region = match exact {
        Some(p) => p,
        None => {
            let (floor, band) = chebyshev(dim, rows);
            if floor > FEASIBILITY_TOLERANCE {
                let point = band
                    .project(&reference_point)
                    .or_else(|| band.vertices().into_iter().next())
                    .expect("the least-violation set is nonempty");
                return Resolved {
                    point,
                    status: FlipStatus::Infeasible,
                    floor: Some(floor),
                };
            }
            rows.iter().fold(Polytope::unit_box(dim), |p, row| {
                p.with_band(row, FEASIBILITY_TOLERANCE)
            })
        }
    };

    let spread = Polytope::coordinate_range(&region.vertices());
    let status = if spread > FEASIBILITY_TOLERANCE {
        FlipStatus::UnderdeterminedResolved
    } else {
        FlipStatus::Feasible
    };

    for forms in objectives {
        region = tighten(region, forms);
    }
    if tie_break == TieBreak::MinMass {
        let ones = vec![1.0; dim];
        if let Some((mass, _)) = region.minimize(&ones) {
            region = region.with_inequality(Row::new(ones, mass + OBJECTIVE_SLACK));
        }
    }
    let point = region
        .project(&reference_point)
        .or_else(|| region.vertices().into_iter().next())
        .expect("the feasible region is nonempty");
    Resolved {
        point,
        status,
        floor: None,
    }
}

/// Restricts the region to the minimizers of `max_j |L_j · q|`.
///
/// A zero optimum or a single form pins the forms exactly; otherwise the
/// optimum is imposed as a band with a small slack.
fn tighten(region: Polytope, forms: &[Vec<f64>]) -> Polytope {
    let (best, at) = min_max_abs(&region, forms);
    let pinned: Option<Vec<Row>> = if best <= OBJECTIVE_SLACK {
        Some(forms.iter().map(|f| Row::new(f.clone(), 0.0)).collect())
    } else if let [form] = forms {
        let sign = Row::new(form.clone(), 0.0).dot(&at).signum();
        Some(vec![Row::new(form.clone(), sign * best)])
    } else {
        None
    };
    if let Some(rows) = pinned {
        let exact = rows
            .iter()
            .try_fold(region.clone(), |p, row| p.with_equality(row))
            .filter(|p| !p.vertices().is_empty());
        if let Some(exact) = exact {
            return exact;
        }
    }
    forms.iter().fold(region, |p, form| {
        p.with_band(&Row::new(form.clone(), 0.0), best + OBJECTIVE_SLACK)
    })
}

/// `min max_j |L_j · q|` over the region and a minimizer, via an epigraph variable.
fn min_max_abs(region: &Polytope, forms: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let dim = region.dim();
    let mut lifted = region.lifted(1);
    for form in forms {
        let mut up = form.clone();
        up.push(-1.0);
        let mut down: Vec<f64> = form.iter().map(|c| -c).collect();
        down.push(-1.0);
        lifted = lifted
            .with_inequality(Row::new(up, 0.0))
            .with_inequality(Row::new(down, 0.0));
    }
    let mut cap = vec![0.0; dim + 1];
    cap[dim] = 1.0;
    lifted = lifted.with_inequality(Row::new(cap, EPIGRAPH_BOUND));
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let (value, mut point) = lifted.minimize(&objective).expect("the region is nonempty");
    point.truncate(dim);
    (value.max(0.0), point)
}

/// Smallest achievable largest violation over the box, and the set of box
/// points achieving it.
fn chebyshev(dim: usize, rows: &[Row]) -> (f64, Polytope) {
    let forms: Vec<Row> = rows.to_vec();
    let mut lifted = Polytope::unit_box(dim).lifted(1);
    for row in &forms {
        let mut up = row.coeffs.clone();
        up.push(-1.0);
        let mut down: Vec<f64> = row.coeffs.iter().map(|c| -c).collect();
        down.push(-1.0);
        lifted = lifted
            .with_inequality(Row::new(up, row.rhs))
            .with_inequality(Row::new(down, -row.rhs));
    }
    let mut cap = vec![0.0; dim + 1];
    cap[dim] = 1.0;
    lifted = lifted.with_inequality(Row::new(cap, EPIGRAPH_BOUND));
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let floor = lifted
        .minimize(&objective)
        .map(|(v, _)| v.max(0.0))
        .expect("the lifted box always has vertices");
    let band = forms.iter().fold(Polytope::unit_box(dim), |p, row| {
        p.with_band(row, floor + OBJECTIVE_SLACK)
    });
    (floor, band)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{Amplitude, Coefficients};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

    fn simple(alpha2: f64, x: f64) -> ScenarioConfig {
        ScenarioConfig::simple(Coefficients::from_weight(alpha2).unwrap(), Coefficients::from_angle(x)).unwrap()
    }

    fn protocol(mu2: f64) -> ScenarioConfig {
        ScenarioConfig::extended(
            Coefficients::from_weight(0.5).unwrap(),
            Coefficients::from_angle(FRAC_PI_8),
            Coefficients::from_weight(mu2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_examples() {
        let s = solve_single_flip(&simple(0.5, FRAC_PI_4), TieBreak::default()).unwrap();
        assert!(s.is_feasible());
        assert!((s.parameters[0] - 0.5).abs() < 1e-12);

        let s = solve_single_flip(&simple(0.5, 0.0), TieBreak::default()).unwrap();
        assert!(s.is_feasible());
        assert!(s.parameters[0].abs() < 1e-12);

        let s = solve_single_flip(&simple(0.5, FRAC_PI_8), TieBreak::default()).unwrap();
        assert_eq!(s.status, FlipStatus::Infeasible);
        let cert = s.certificate.unwrap();
        assert_eq!(cert.equation, "difference");
        assert!((cert.violation - 0.5).abs() < 1e-12);
        assert!((cert.floor - 0.5).abs() < 1e-12);
    }

    #[test]
    fn min_mass_differs_only_on_free_parameters() {
        let s = solve_single_flip(&simple(0.5, FRAC_PI_4), TieBreak::MinMass).unwrap();
        assert!(s.parameters[0].abs() < 1e-12);
        let s = solve_outcome_flip(&simple(0.5, FRAC_PI_8), TieBreak::MinMass).unwrap();
        assert!((s.parameters[0] - 0.5).abs() < 1e-12 && s.parameters[1].abs() < 1e-12);
    }

    #[test]
    fn two_parameter_examples() {
        let s = solve_outcome_flip(&simple(0.5, FRAC_PI_8), TieBreak::default()).unwrap();
        assert!(s.is_feasible());
        assert!((s.epsilon + 0.5).abs() < 1e-12);
        assert!((s.parameters[0] - 0.5).abs() < 1e-12);
        assert!(s.parameters[1].abs() < 1e-12);

        let config = simple(1.0, 0.6);
        let s = solve_outcome_flip(&config, TieBreak::default()).unwrap();
        let rate = config.record_flip_rate();
        assert!((s.parameters[0] - rate).abs() < 1e-12);
        assert!((s.parameters[1] - rate).abs() < 1e-12);
    }

    #[test]
    fn protocol_joint_two() {
        let s = solve_joint_flip(&protocol(1.0), TieBreak::default()).unwrap();
        assert_eq!(s.status, FlipStatus::Feasible);
        assert!(s.parameters.iter().all(|q| (q - 0.25).abs() < 1e-12));
        let s = solve_joint_flip(&protocol(1.0 / 3.0), TieBreak::default()).unwrap();
        assert_eq!(s.status, FlipStatus::Feasible);
        assert!(s.parameters.iter().all(|q| (q - (0.25 + FRAC_1_SQRT_2)).abs() < 1e-12));
    }

    #[test]
    fn bell_bob_is_infeasible() {
        let config = ScenarioConfig::extended(
            Coefficients::from_weight(0.5).unwrap(),
            Coefficients::from_angle(0.3),
            Coefficients::from_weight(0.5).unwrap(),
        )
        .unwrap();
        let s = solve_joint_flip(&config, TieBreak::default()).unwrap();
        assert_eq!(s.status, FlipStatus::Infeasible);
        assert!(s.certificate.unwrap().floor > 1e-3);
    }

    #[test]
    fn four_parameter_examples() {
        let diagonal = ScenarioConfig::extended(
            Coefficients::from_weight(0.3).unwrap(),
            Coefficients::new(Amplitude::real(1.0), Amplitude::real(0.0)),
            Coefficients::from_weight(0.8).unwrap(),
        )
        .unwrap();
        let s = solve_conditional_flip(&diagonal, TieBreak::default()).unwrap();
        assert!(s.parameters.iter().all(|q| q.abs() < 1e-12), "{:?}", s.parameters);

        let s = solve_conditional_flip(&protocol(1.0), TieBreak::default()).unwrap();
        assert!(
            s.parameters.iter().all(|q| (q - 0.25).abs() < 1e-12),
            "{:?}",
            s.parameters
        );
        let [q0, q1] = s.effective.unwrap();
        assert!((q0 - 0.25).abs() < 1e-12 && (q1 - 0.25).abs() < 1e-12);
    }
}
