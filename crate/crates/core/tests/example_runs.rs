mod common;

use common::read_series;
use mpckit::mpc::{closed_loop_simulate, SimTrace};
use mpckit::scenario::Scenario;
use nalgebra::dvector;

fn run(text: &str) -> (Scenario, SimTrace) {
    let s = Scenario::parse(text).unwrap();
    let resolved = s.resolve().unwrap();
    let trace = closed_loop_simulate(&resolved.config, &s.x0, s.steps, None).unwrap();
    (s, trace)
}

#[test]
fn regulation_converges_inside_state_box() {
    let (s, trace) = run(include_str!("../scenarios/regulation.scn"));
    assert_eq!(trace.feasible_steps, 100);
    assert!(trace.states.last().unwrap().amax() <= 0.5);
    for x in &trace.states {
        assert!(s.state_set.contains(x, 1e-9).unwrap());
    }
    for pair in trace.costs.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-6);
    }
}

#[test]
fn stated_initial_state_loses_feasibility_at_step_five() {
    let (_, trace) = run(include_str!("../scenarios/loss_of_feasibility.scn"));
    assert!(trace.terminated_infeasible);
    assert_eq!(trace.infeasible_step(), Some(5));
    assert_eq!(trace.states[5], dvector![9.3, 5.0]);
}

#[test]
fn plotted_run_loses_feasibility_at_step_five() {
    let (_, trace) = run(include_str!("../scenarios/loss_of_feasibility_plotted.scn"));
    assert_eq!(trace.infeasible_step(), Some(5));
    for line in include_str!("fixtures/plotted_states.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
    {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        let x = &trace.states[v[0] as usize];
        assert!((x - dvector![v[1], v[2]]).amax() <= 1e-9, "step {}", v[0]);
    }
}

#[test]
fn plotted_predictions_are_reproduced() {
    let (_, trace) = run(include_str!("../scenarios/loss_of_feasibility_plotted.scn"));
    for line in include_str!("fixtures/plotted_predictions.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
    {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        let (k, i) = (v[0] as usize, v[1] as usize);
        let pred = trace.predictions[k].rows(2 * i, 2).into_owned();
        assert!(
            (pred - dvector![v[2], v[3]]).amax() <= 1e-6,
            "step {k}, index {i}"
        );
    }
    // The horizon end of step 4 sits on the state boundary.
    assert!((trace.predictions[4][10] - 10.0).abs() <= 1e-9);
}

#[test]
fn terminal_set_run_reproduces_plotted_inputs() {
    let (s, trace) = run(include_str!("../scenarios/recursive_feasibility.scn"));
    assert_eq!(s.x0, dvector![7.24, 10.0]);
    assert_eq!(trace.feasible_steps, 100);
    let expected = read_series(include_str!("fixtures/plotted_inputs.txt"));
    assert_eq!(expected.len(), 100);
    for (k, (u, e)) in trace.inputs.iter().zip(&expected).enumerate() {
        assert!((u[0] - e).abs() <= 1e-3, "step {k}: {} vs {e}", u[0]);
    }
    for u in &trace.inputs[..9] {
        assert!((u[0] + 20.0).abs() <= 1e-6);
    }
    assert!(trace.states.last().unwrap().amax() <= 0.5);
}

#[test]
fn terminal_set_run_from_stated_state_is_infeasible_immediately() {
    let text = include_str!("../scenarios/recursive_feasibility.scn")
        .replace("x0 = [7.24, 10]", "x0 = [7.3, 10]");
    let (_, trace) = run(&text);
    assert_eq!(trace.infeasible_step(), Some(0));
}
