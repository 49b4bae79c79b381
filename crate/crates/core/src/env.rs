//! CartPole-v1 dynamics with the observation restricted to the pole.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;

use crate::circuit::ObservationPair;
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.8;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
pub const HALF_LENGTH: f64 = 0.5;
pub const FORCE: f64 = 10.0;
pub const DT: f64 = 0.02;
pub const ANGLE_LIMIT: f64 = 12.0 * PI / 180.0;
pub const POSITION_LIMIT: f64 = 2.4;
pub const HORIZON: usize = 200;
const RESET_RANGE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoneReason {
    Angle,
    Position,
    Horizon,
}

impl fmt::Display for DoneReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DoneReason::Angle => "angle",
            DoneReason::Position => "position",
            DoneReason::Horizon => "horizon",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub cart_position: f64,
    pub cart_velocity: f64,
    pub pole_angle: f64,
    pub pole_angular_velocity: f64,
    pub step_count: usize,
    /// Set once the episode has ended; stepping such a state is an error.
    pub done: Option<DoneReason>,
}

impl CartPoleState {
    pub fn new(x: f64, x_dot: f64, phi: f64, omega: f64) -> Self {
        CartPoleState {
            cart_position: x,
            cart_velocity: x_dot,
            pole_angle: phi,
            pole_angular_velocity: omega,
            step_count: 0,
            done: None,
        }
    }

    /// Whitespace-separated row for the debug trace.
    pub fn trace_row(&self) -> String {
        format!(
            "{} {:.17e} {:.17e} {:.17e} {:.17e} {}",
            self.step_count,
            self.cart_position,
            self.cart_velocity,
            self.pole_angle,
            self.pole_angular_velocity,
            self.done.map_or("-".to_string(), |r| r.to_string())
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub state: CartPoleState,
    pub observation: ObservationPair,
    pub reward: f64,
    pub done: bool,
    pub done_reason: Option<DoneReason>,
}

/// Cart and pole accelerations `(x_acc, theta_acc)` under horizontal force `force`.
pub fn accelerations(state: &CartPoleState, force: f64) -> (f64, f64) {
    let total_mass = CART_MASS + POLE_MASS;
    let pole_mass_length = POLE_MASS * HALF_LENGTH;
    let (sin, cos) = state.pole_angle.sin_cos();
    let omega = state.pole_angular_velocity;
    let temp = (force + pole_mass_length * omega * omega * sin) / total_mass;
    let theta_acc = (GRAVITY * sin - cos * temp) / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / total_mass));
    let x_acc = temp - pole_mass_length * theta_acc * cos / total_mass;
    (x_acc, theta_acc)
}

/// Environment with a configurable episode horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartPole {
    pub horizon: usize,
}

impl Default for CartPole {
    fn default() -> Self {
        CartPole { horizon: HORIZON }
    }
}

impl CartPole {
    pub fn new(horizon: usize) -> Self {
        CartPole { horizon }
    }

    /// All four components uniform on `[-0.05, 0.05]`.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> CartPoleState {
        let mut u = || rng.random_range(-RESET_RANGE..=RESET_RANGE);
        CartPoleState::new(u(), u(), u(), u())
    }

    pub fn step(&self, state: &CartPoleState, action: usize) -> Result<StepResult> {
        if let Some(reason) = state.done {
            return Err(Error::ContractViolation(format!("episode already ended ({reason})")));
        }
        if action > 1 {
            return Err(Error::ContractViolation(format!("action must be 0 or 1, got {action}")));
        }
        let force = if action == 1 { FORCE } else { -FORCE };
        let (x_acc, theta_acc) = accelerations(state, force);
        let mut next = CartPoleState {
            cart_position: state.cart_position + DT * state.cart_velocity,
            cart_velocity: state.cart_velocity + DT * x_acc,
            pole_angle: state.pole_angle + DT * state.pole_angular_velocity,
            pole_angular_velocity: state.pole_angular_velocity + DT * theta_acc,
            step_count: state.step_count + 1,
            done: None,
        };
        if !(next.cart_position.is_finite()
            && next.cart_velocity.is_finite()
            && next.pole_angle.is_finite()
            && next.pole_angular_velocity.is_finite())
        {
            return Err(Error::NumericalDegeneracy("non-finite cart-pole state".into()));
        }
        next.done = if next.pole_angle.abs() > ANGLE_LIMIT {
            Some(DoneReason::Angle)
        } else if next.cart_position.abs() > POSITION_LIMIT {
            Some(DoneReason::Position)
        } else if next.step_count >= self.horizon {
            Some(DoneReason::Horizon)
        } else {
            None
        };
        Ok(StepResult {
            state: next,
            observation: restrict(&next),
            reward: 1.0,
            done: next.done.is_some(),
            done_reason: next.done,
        })
    }
}

pub fn reset<R: Rng + ?Sized>(rng: &mut R) -> CartPoleState {
    CartPole::default().reset(rng)
}

pub fn step(state: &CartPoleState, action: usize) -> Result<StepResult> {
    CartPole::default().step(state, action)
}

/// `(pole angle, pole angular velocity)`.
pub fn restrict(state: &CartPoleState) -> ObservationPair {
    ObservationPair::new(state.pole_angle, state.pole_angular_velocity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reset_is_seeded_and_bounded() {
        let a = reset(&mut ChaCha8Rng::seed_from_u64(4));
        let b = reset(&mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut sums = [0.0; 4];
        let n = 10_000;
        for _ in 0..n {
            let s = reset(&mut rng);
            let v = [s.cart_position, s.cart_velocity, s.pole_angle, s.pole_angular_velocity];
            for (acc, x) in sums.iter_mut().zip(v) {
                assert!(x.abs() <= 0.05);
                *acc += x;
            }
            assert_eq!(s.step_count, 0);
            let o = restrict(&s);
            assert!(o.pole_angle.abs() <= 0.05 && o.angular_velocity.abs() <= 0.05);
        }
        for acc in sums {
            assert!((acc / n as f64).abs() < 0.005);
        }
    }

    #[test]
    fn push_right_from_rest() {
        let r = step(&CartPoleState::default(), 1).unwrap();
        // At rest: temp = F / 1.1, theta_acc = -temp / (0.5 (4/3 - 0.1/1.1)),
        // x_acc = temp - 0.05 theta_acc / 1.1.
        let temp: f64 = 10.0 / 1.1;
        let theta_acc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
        let x_acc = temp - 0.05 * theta_acc / 1.1;
        assert!((theta_acc - (-14.634146341463415)).abs() < 1e-12);
        assert!((x_acc - 9.7560975609756095).abs() < 1e-12);
        let (xa, ta) = accelerations(&CartPoleState::default(), FORCE);
        assert!((xa - x_acc).abs() < 1e-12 && (ta - theta_acc).abs() < 1e-12);
        assert_eq!(r.state.cart_position, 0.0);
        assert!((r.state.cart_velocity - DT * x_acc).abs() < 1e-15);
        assert!((r.state.pole_angular_velocity - DT * theta_acc).abs() < 1e-15);
        assert_eq!((r.reward, r.done, r.state.step_count), (1.0, false, 1));
    }

    #[test]
    fn thresholds() {
        let tilted = CartPoleState::new(0.0, 0.0, 13f64.to_radians(), 0.0);
        let r = step(&tilted, 0).unwrap();
        assert_eq!(r.done_reason, Some(DoneReason::Angle));
        assert_eq!(r.reward, 1.0);
        let off = CartPoleState::new(2.45, 0.0, 0.0, 0.0);
        assert_eq!(step(&off, 0).unwrap().done_reason, Some(DoneReason::Position));
        assert!(matches!(step(&r.state, 0), Err(Error::ContractViolation(_))));
        assert!(matches!(step(&CartPoleState::default(), 2), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn horizon_truncates() {
        let env = CartPole::new(20);
        let mut s = CartPoleState::default();
        let mut total = 0.0;
        let mut steps = 0;
        // Alternating pushes keep the pole up from rest for a short horizon.
        loop {
            let r = env.step(&s, steps % 2).unwrap();
            total += r.reward;
            steps += 1;
            s = r.state;
            if r.done {
                assert_eq!(r.done_reason, Some(DoneReason::Horizon));
                break;
            }
        }
        assert_eq!(steps, 20);
        assert_eq!(total, 20.0);
    }

    #[test]
    fn restriction_ignores_cart() {
        let a = CartPoleState::new(1.0, 2.0, 0.1, -0.2);
        assert_eq!(restrict(&a), ObservationPair::new(0.1, -0.2));
        let b = CartPoleState::new(-1.5, 0.3, 0.1, -0.2);
        assert_eq!(restrict(&a), restrict(&b));
    }

    proptest! {
        #[test]
        fn random_play_stays_finite_and_bounded(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = reset(&mut rng);
            let mut steps = 0;
            let mut total = 0.0;
            loop {
                let r = step(&s, rng.random_range(0..2)).unwrap();
                prop_assert!(r.state.pole_angular_velocity.is_finite() && r.state.cart_velocity.is_finite());
                steps += 1;
                total += r.reward;
                s = r.state;
                if r.done { break; }
            }
            prop_assert!(steps <= HORIZON);
            prop_assert_eq!(total, steps as f64);
        }
    }
}
