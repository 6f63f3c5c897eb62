//! Lumped 1-DOF model of a compliant arm pushing an object.
//!
//! The arm (mass `m_arm`) is driven by an actuator spring `k_act` whose
//! equilibrium point ramps toward a goal. Contact is a compression-only
//! spring `k_obj` of rest length `L0` between the arm and the object. A
//! movable object sticks until the contact force exceeds `μ_s·m_obj·g`,
//! then slides against kinetic friction `μ_k·m_obj·g` until it stops.
//!
//! ```text
//! F_act  = k_act (x_eq - x_arm)
//! F_surf = max(0, k_obj (L0 - (x_obj - x_arm)))
//! F_arm  = F_act - F_surf - b_arm v_arm
//! F_obj  = F_surf - F_fr
//! ```

use super::SimError;

pub const GRAVITY: f64 = 9.81;

/// Physical parameters and integration settings for one simulated push.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimScenario {
    pub m_arm: f64,
    pub m_obj: f64,
    pub k_act: f64,
    pub k_obj: f64,
    pub mu_s: f64,
    pub mu_k: f64,
    /// Rest length of the contact spring (m).
    pub rest_length: f64,
    pub x0_arm: f64,
    pub x0_obj: f64,
    /// Final equilibrium point of the actuator spring (m).
    pub x_eq_goal: f64,
    /// Ramp speed of the equilibrium point (m/s); infinity jumps straight
    /// to the goal.
    pub eq_velocity: f64,
    pub b_arm: f64,
    pub g: f64,
    pub fixed: bool,
    pub duration: f64,
    pub dt: f64,
}

/// Material presets of the lumped model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Material {
    /// Glass-reinforced plastic cube: 5000 N/m, 1.5 kg, μ 0.4/0.2.
    Rigid,
    /// Foam cube: 50 N/m, 20 g, μ 0.5/0.3.
    Soft,
}

impl SimScenario {
    /// Reference parameter set: 0.5 kg arm on a 200 N/m actuator spring, a
    /// 10 cm cube whose surface sits 0.3 m away, goal at 0.5 m, one second
    /// at `dt = 1e-4`, critical arm damping.
    pub fn reference(material: Material, fixed: bool) -> Self {
        let (k_obj, m_obj, mu_s, mu_k) = match material {
            Material::Rigid => (5000.0, 1.5, 0.4, 0.2),
            Material::Soft => (50.0, 0.02, 0.5, 0.3),
        };
        let m_arm = 0.5;
        let k_act = 200.0;
        Self {
            m_arm,
            m_obj,
            k_act,
            k_obj,
            mu_s,
            mu_k,
            rest_length: 0.1,
            x0_arm: 0.0,
            x0_obj: 0.4,
            x_eq_goal: 0.5,
            eq_velocity: 1.0,
            b_arm: critical_damping(k_act, m_arm),
            g: GRAVITY,
            fixed,
            duration: 1.0,
            dt: 1e-4,
        }
    }

    /// Arm position at which the contact spring starts to compress.
    pub fn contact_position(&self) -> f64 {
        self.x0_obj - self.rest_length
    }

    pub fn static_friction_limit(&self) -> f64 {
        self.mu_s * self.m_obj * self.g
    }

    pub fn kinetic_friction(&self) -> f64 {
        self.mu_k * self.m_obj * self.g
    }

    pub fn equilibrium_at(&self, t: f64) -> f64 {
        let span = self.x_eq_goal - self.x0_arm;
        if self.eq_velocity.is_infinite() {
            return self.x_eq_goal;
        }
        let travel = (self.eq_velocity * t).min(span.abs());
        self.x0_arm + travel.copysign(span)
    }

    /// Steady-state contact force against a fixed object once the
    /// equilibrium point rests at the goal: two springs in series.
    pub fn series_equilibrium_force(&self) -> f64 {
        let k = self.k_act * self.k_obj / (self.k_act + self.k_obj);
        k * (self.x_eq_goal - self.contact_position()).max(0.0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("m_arm", self.m_arm),
            ("m_obj", self.m_obj),
            ("k_act", self.k_act),
            ("k_obj", self.k_obj),
            ("dt", self.dt),
            ("duration", self.duration),
            ("eq_velocity", self.eq_velocity),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(SimError::InvalidScenario(format!("{name} must be > 0 (got {v})")));
            }
        }
        for (name, v) in [("b_arm", self.b_arm), ("g", self.g), ("rest_length", self.rest_length)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::InvalidScenario(format!("{name} must be >= 0 (got {v})")));
            }
        }
        if !(0.0 <= self.mu_k && self.mu_k <= self.mu_s && self.mu_s.is_finite()) {
            return Err(SimError::InvalidScenario(format!(
                "friction needs 0 <= mu_k <= mu_s (got {} / {})",
                self.mu_k, self.mu_s
            )));
        }
        if self.x0_obj - self.x0_arm < self.rest_length {
            return Err(SimError::InvalidScenario("object starts inside the arm".into()));
        }
        Ok(())
    }
}

pub fn critical_damping(k: f64, m: f64) -> f64 {
    2.0 * (k * m).sqrt()
}

/// Sampled state and force history, one entry per integration step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimTrajectory {
    pub dt: f64,
    pub t: Vec<f64>,
    pub x_arm: Vec<f64>,
    pub x_obj: Vec<f64>,
    pub v_arm: Vec<f64>,
    pub v_obj: Vec<f64>,
    pub f_act: Vec<f64>,
    pub f_surf: Vec<f64>,
    pub f_fr: Vec<f64>,
    /// First time the contact force is positive.
    pub contact_onset_time: Option<f64>,
}

impl SimTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    pub fn peak_contact_force(&self) -> f64 {
        self.f_surf.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    x_arm: f64,
    v_arm: f64,
    x_obj: f64,
    v_obj: f64,
    stuck: bool,
}

struct Forces {
    act: f64,
    surf: f64,
    fr: f64,
    a_arm: f64,
    a_obj: f64,
}

const SANITY_BOUND: f64 = 10.0;

impl SimScenario {
    fn forces(&self, s: &State, t: f64) -> Forces {
        let act = self.k_act * (self.equilibrium_at(t) - s.x_arm);
        let surf = (self.k_obj * (self.rest_length - (s.x_obj - s.x_arm))).max(0.0);
        let a_arm = (act - surf - self.b_arm * s.v_arm) / self.m_arm;
        let (fr, a_obj) = if self.fixed || s.stuck {
            (surf, 0.0)
        } else {
            // Kinetic friction opposes the motion, or the push when at rest.
            let dir = if s.v_obj != 0.0 { s.v_obj.signum() } else { 1.0 };
            let fr = self.kinetic_friction() * dir;
            (fr, (surf - fr) / self.m_obj)
        };
        Forces { act, surf, fr, a_arm, a_obj }
    }
}

/// Integrates the scenario with velocity Verlet (kick-drift-kick).
///
/// A stuck object breaks away at the start of a step when the contact force
/// exceeds the static limit. A sliding object that comes to a halt latches
/// back to rest if the contact force is inside the static limit.
pub fn simulate(sc: &SimScenario) -> Result<SimTrajectory, SimError> {
    sc.validate()?;
    let steps = (sc.duration / sc.dt).round() as usize;
    let mut traj = SimTrajectory {
        dt: sc.dt,
        ..Default::default()
    };
    for v in [
        &mut traj.t,
        &mut traj.x_arm,
        &mut traj.x_obj,
        &mut traj.v_arm,
        &mut traj.v_obj,
        &mut traj.f_act,
        &mut traj.f_surf,
        &mut traj.f_fr,
    ] {
        v.reserve(steps + 1);
    }

    let mut s = State {
        x_arm: sc.x0_arm,
        v_arm: 0.0,
        x_obj: sc.x0_obj,
        v_obj: 0.0,
        stuck: true,
    };
    let limit = sc.static_friction_limit();
    let mut f = sc.forces(&s, 0.0);
    let half = 0.5 * sc.dt;

    for k in 0..=steps {
        let t = k as f64 * sc.dt;
        traj.t.push(t);
        traj.x_arm.push(s.x_arm);
        traj.x_obj.push(s.x_obj);
        traj.v_arm.push(s.v_arm);
        traj.v_obj.push(s.v_obj);
        traj.f_act.push(f.act);
        traj.f_surf.push(f.surf);
        traj.f_fr.push(f.fr);
        if traj.contact_onset_time.is_none() && f.surf > 0.0 {
            traj.contact_onset_time = Some(t);
        }
        if k == steps {
            break;
        }

        if !sc.fixed && s.stuck && f.surf > limit {
            s.stuck = false;
            f = sc.forces(&s, t);
        }

        s.v_arm += half * f.a_arm;
        s.v_obj += half * f.a_obj;
        if !s.stuck && s.v_obj < 0.0 && f.surf <= limit {
            s.v_obj = 0.0;
        }
        s.x_arm += sc.dt * s.v_arm;
        s.x_obj += sc.dt * s.v_obj;

        f = sc.forces(&s, t + sc.dt);
        s.v_arm += half * f.a_arm;
        s.v_obj += half * f.a_obj;
        if !sc.fixed && !s.stuck && s.v_obj <= 0.0 {
            s.v_obj = 0.0;
            if f.surf <= limit {
                s.stuck = true;
                f = sc.forces(&s, t + sc.dt);
            }
        }

        if ![s.x_arm, s.x_obj, s.v_arm, s.v_obj].iter().all(|v| v.is_finite())
            || s.x_arm.abs() > SANITY_BOUND
            || s.x_obj.abs() > SANITY_BOUND
        {
            return Err(SimError::UnstableIntegration { t: t + sc.dt });
        }
    }
    Ok(traj)
}
