//! Preparation recipes, analysis settings and their pulsed realization.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use crate::evolution::{channel_of, CollapseSet, EvolutionError, Idle, Superoperator, TransitionDrive};
use crate::pulse::GaussianEnvelope;
use crate::qutrit::{
    c, expm_hermitian, matrix_unit, pauli_pair, DensityMatrix, Mat3, QutritState, LEVEL_0, LEVEL_1,
    LEVEL_E,
};

/// Pulse slots reserved for preparation and for analysis in a pulsed
/// sequence. Shorter recipes are padded with identity slots.
pub const PREP_SLOTS: usize = 2;
pub const ANALYSIS_SLOTS: usize = 2;
/// Separation between consecutive pulses, ns.
pub const DEFAULT_GAP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// `|0⟩ ↔ |e⟩`.
    ZeroAux,
    /// `|e⟩ ↔ |1⟩`.
    AuxOne,
}

impl Transition {
    /// `(lower, upper)` level indices.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::ZeroAux => (LEVEL_0, LEVEL_E),
            Transition::AuxOne => (LEVEL_E, LEVEL_1),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Transition::ZeroAux => "0e",
            Transition::AuxOne => "e1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    XPi,
    XHalf,
    YHalf,
}

impl Rotation {
    pub fn angle(self) -> f64 {
        match self {
            Rotation::XPi => PI,
            Rotation::XHalf | Rotation::YHalf => FRAC_PI_2,
        }
    }

    /// Phase of the drive axis in the transition's xy-plane.
    pub fn axis_phase(self) -> f64 {
        match self {
            Rotation::XPi | Rotation::XHalf => 0.0,
            Rotation::YHalf => FRAC_PI_2,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Rotation::XPi => "X180",
            Rotation::XHalf => "X90",
            Rotation::YHalf => "Y90",
        }
    }
}

/// A resonant rotation `exp(−i·(α/2)·(cos φ σˣ + sin φ σʸ))` on one
/// transition, `σ` acting with the lower level as the `+1` state of `σᶻ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionPulse {
    pub transition: Transition,
    pub rotation: Rotation,
}

impl TransitionPulse {
    pub const fn new(transition: Transition, rotation: Rotation) -> Self {
        Self {
            transition,
            rotation,
        }
    }

    pub fn all() -> [TransitionPulse; 6] {
        use Rotation::*;
        use Transition::*;
        [
            Self::new(ZeroAux, XPi),
            Self::new(ZeroAux, XHalf),
            Self::new(ZeroAux, YHalf),
            Self::new(AuxOne, XPi),
            Self::new(AuxOne, XHalf),
            Self::new(AuxOne, YHalf),
        ]
    }

    fn generator(&self) -> Mat3 {
        let (lower, upper) = self.transition.levels();
        let (x, y, _) = pauli_pair(lower, upper);
        let phase = self.rotation.axis_phase();
        x * c(phase.cos(), 0.0) + y * c(phase.sin(), 0.0)
    }

    pub fn ideal_unitary(&self) -> Mat3 {
        expm_hermitian(&self.generator(), 0.5 * self.rotation.angle())
            .expect("transition generators are Hermitian")
    }

    /// The drive realizing this rotation with a 2π-calibrated envelope
    /// rescaled to the rotation angle.
    pub fn drive(&self, calibrated: &GaussianEnvelope) -> TransitionDrive {
        let (lower, upper) = self.transition.levels();
        TransitionDrive {
            envelope: calibrated.scaled(self.rotation.angle() / TAU),
            lower,
            upper,
            axis_phase: self.rotation.axis_phase(),
        }
    }
}

impl fmt::Display for TransitionPulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.rotation.tag(), self.transition.tag())
    }
}

/// Ordered pulse list; an empty recipe is the identity.
pub type Recipe = Vec<TransitionPulse>;

pub fn recipe_name(recipe: &[TransitionPulse]) -> String {
    if recipe.is_empty() {
        "I".to_string()
    } else {
        recipe.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn recipe_unitary(recipe: &[TransitionPulse]) -> Mat3 {
    recipe
        .iter()
        .fold(Mat3::identity(), |acc, p| p.ideal_unitary() * acc)
}

/// The nine input states and the shortest pulse recipes that prepare them
/// from `|0⟩`.
#[derive(Debug, Clone)]
pub struct InputStateSet {
    states: [QutritState; 9],
    recipes: [Recipe; 9],
}

pub const INPUT_NAMES: [&str; 9] = ["0", "e", "1", "0+e", "0+ie", "0+1", "0+i1", "e+1", "e+i1"];

impl InputStateSet {
    pub fn standard() -> Self {
        use Rotation::*;
        use Transition::*;
        let p = TransitionPulse::new;
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        let states = [
            QutritState::basis(LEVEL_0),
            QutritState::basis(LEVEL_E),
            QutritState::basis(LEVEL_1),
            QutritState::superposition(LEVEL_0, LEVEL_E, one),
            QutritState::superposition(LEVEL_0, LEVEL_E, i),
            QutritState::superposition(LEVEL_0, LEVEL_1, one),
            QutritState::superposition(LEVEL_0, LEVEL_1, i),
            QutritState::superposition(LEVEL_E, LEVEL_1, one),
            QutritState::superposition(LEVEL_E, LEVEL_1, i),
        ];
        // Shortest sequences found by exhaustive search over the six
        // rotations (see the enumeration test below).
        let recipes = [
            vec![],
            vec![p(ZeroAux, XPi)],
            vec![p(ZeroAux, XPi), p(AuxOne, XPi)],
            vec![p(ZeroAux, YHalf)],
            vec![p(ZeroAux, XPi), p(ZeroAux, XHalf)],
            vec![p(ZeroAux, XPi), p(ZeroAux, XHalf), p(AuxOne, XPi)],
            vec![p(ZeroAux, XPi), p(ZeroAux, YHalf), p(AuxOne, XPi)],
            vec![p(ZeroAux, XPi), p(AuxOne, YHalf)],
            vec![p(ZeroAux, XPi), p(AuxOne, XPi), p(AuxOne, XHalf)],
        ];
        Self { states, recipes }
    }

    pub fn states(&self) -> &[QutritState; 9] {
        &self.states
    }

    pub fn recipes(&self) -> &[Recipe; 9] {
        &self.recipes
    }

    pub fn densities(&self) -> [DensityMatrix; 9] {
        std::array::from_fn(|k| self.states[k].density())
    }
}

/// Analysis rotations applied before a population measurement in the
/// `(|0⟩, |e⟩, |1⟩)` basis.
#[derive(Debug, Clone)]
pub struct MeasurementSettings {
    recipes: Vec<Recipe>,
}

impl MeasurementSettings {
    pub fn standard() -> Self {
        use Rotation::*;
        use Transition::*;
        let p = TransitionPulse::new;
        Self::from_recipes(vec![
                vec![],
                vec![p(ZeroAux, XHalf)],
                vec![p(ZeroAux, YHalf)],
                vec![p(AuxOne, XHalf)],
                vec![p(AuxOne, YHalf)],
                // Swap |e⟩ and |1⟩ first to read out the 0↔1 coherence.
                vec![p(AuxOne, XPi), p(ZeroAux, XHalf)],
                vec![p(AuxOne, XPi), p(ZeroAux, YHalf)],
                vec![p(ZeroAux, XPi)],
                vec![p(AuxOne, XPi)],
        ])
    }

    pub fn from_recipes(recipes: Vec<Recipe>) -> Self {
        Self { recipes }
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn names(&self) -> Vec<String> {
        self.recipes.iter().map(|r| recipe_name(r)).collect()
    }

    /// POVM elements `Π_so = A_s† |o⟩⟨o| A_s`, indexed `[setting][outcome]`.
    pub fn povm(&self) -> Vec<[Mat3; 3]> {
        self.recipes
            .iter()
            .map(|r| {
                let a = recipe_unitary(r);
                std::array::from_fn(|o| a.adjoint() * matrix_unit(o, o) * a)
            })
            .collect()
    }
}

/// Noisy realization of preparation and analysis pulses: every rotation is a
/// calibrated single-transition pulse integrated under the collapse set,
/// with fixed gaps between pulses.
#[derive(Debug, Clone)]
pub struct PulsedSpam {
    pulses: Vec<(TransitionPulse, Superoperator)>,
    idle_slot: Superoperator,
    gap: Superoperator,
    slot_length: f64,
    gap_length: f64,
}

impl PulsedSpam {
    pub fn new(
        calibrated: &GaussianEnvelope,
        noise: &CollapseSet,
        dt: f64,
        gap_length: f64,
    ) -> Result<Self, EvolutionError> {
        let pulses = TransitionPulse::all()
            .into_iter()
            .map(|p| Ok((p, channel_of(&p.drive(calibrated), noise, dt)?)))
            .collect::<Result<Vec<_>, EvolutionError>>()?;
        let slot_length = calibrated.total_length();
        let idle_slot = idle_channel(slot_length, noise, dt)?;
        let gap = idle_channel(gap_length, noise, dt)?;
        Ok(Self {
            pulses,
            idle_slot,
            gap,
            slot_length,
            gap_length,
        })
    }

    pub fn pulse(&self, p: &TransitionPulse) -> &Superoperator {
        &self
            .pulses
            .iter()
            .find(|(q, _)| q == p)
            .expect("library holds every transition pulse")
            .1
    }

    pub fn gap(&self) -> &Superoperator {
        &self.gap
    }

    pub fn slot_length(&self) -> f64 {
        self.slot_length
    }

    pub fn gap_length(&self) -> f64 {
        self.gap_length
    }

    /// Channel of a recipe padded to `slots` pulses, with gaps between
    /// consecutive pulses.
    pub fn recipe_channel(&self, recipe: &[TransitionPulse], slots: usize) -> Superoperator {
        let n = recipe.len().max(slots);
        let mut total = Superoperator::identity();
        for k in 0..n {
            if k > 0 {
                total = total.then(&self.gap);
            }
            let step = match recipe.get(k) {
                Some(p) => self.pulse(p),
                None => &self.idle_slot,
            };
            total = total.then(step);
        }
        total
    }

    /// Length of a recipe of `pulses` pulses including gaps, ns.
    pub fn sequence_length(&self, pulses: usize) -> f64 {
        if pulses == 0 {
            0.0
        } else {
            pulses as f64 * self.slot_length + (pulses - 1) as f64 * self.gap_length
        }
    }
}

fn idle_channel(length: f64, noise: &CollapseSet, dt: f64) -> Result<Superoperator, EvolutionError> {
    if noise.is_noiseless() || length <= 0.0 {
        return Ok(Superoperator::identity());
    }
    crate::evolution::lindblad_superoperator(&Idle { duration: length }, noise, length, dt)
}

/// How preparation and analysis rotations are realized.
#[derive(Debug, Clone)]
pub enum Spam {
    /// Exact unitaries, no duration.
    Ideal,
    /// Calibrated pulses under the noise model.
    Pulsed(Box<PulsedSpam>),
}

/// Prepares input `index` from `|0⟩`.
pub fn prepare_input(inputs: &InputStateSet, index: usize, spam: &Spam) -> DensityMatrix {
    let recipe = &inputs.recipes()[index];
    match spam {
        Spam::Ideal => inputs.states()[index].density(),
        Spam::Pulsed(p) => {
            let ground = QutritState::basis(LEVEL_0).density();
            p.recipe_channel(recipe, PREP_SLOTS).apply_density(&ground)
        }
    }
}
