use super::{AgentRuntime, SimConfig, SimError, Simulation, World};
use crate::city_map::VenueId;
use crate::habits::HabitRecord;
use crate::needs::NeedVector;
use crate::persona::Persona;
use crate::social::{MemoryStore, RelationshipMatrix};
use crate::time::Weekday;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Agent state carried between days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub persona: Persona,
    /// Minutes past the end of the last simulated day (0 unless an action
    /// ran past midnight), stored as the raw clock.
    pub clock: f64,
    pub needs: NeedVector,
    pub habits: Vec<HabitRecord>,
    pub memory: MemoryStore,
    pub venue: VenueId,
}

/// Everything needed to resume a run at a day boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Next day to run.
    pub day: u32,
    pub weekday: Weekday,
    pub config: SimConfig,
    pub agents: Vec<AgentState>,
    pub relationships: RelationshipMatrix,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoints always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cp: Checkpoint = serde_json::from_str(text).map_err(|e| SimError::Checkpoint(e.to_string()))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(SimError::Checkpoint(format!("unsupported version {}", cp.version)));
        }
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        std::fs::write(path, self.to_json()).map_err(|e| SimError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| SimError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

impl<'w> Simulation<'w> {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            day: self.day,
            weekday: self.weekday,
            config: self.config.clone(),
            agents: self
                .agents
                .iter()
                .map(|a| AgentState {
                    persona: a.persona.clone(),
                    clock: a.clock,
                    needs: a.needs,
                    habits: a.habits.clone(),
                    memory: a.memory.clone(),
                    venue: a.venue,
                })
                .collect(),
            relationships: self.relationships.clone(),
        }
    }

    /// Resumes a run. The world must be the one the checkpoint was taken in.
    pub fn from_checkpoint(world: &'w World, cp: Checkpoint) -> Result<Self, SimError> {
        let config: SimConfig = cp.config;
        let agents = cp
            .agents
            .into_iter()
            .map(|s| {
                let mut a = AgentRuntime::new(s.persona, s.needs, config.memory_capacity);
                a.clock = s.clock;
                a.habits = s.habits;
                a.memory = s.memory;
                a.venue = s.venue;
                a
            })
            .collect();
        let sim = Simulation {
            world,
            config,
            agents,
            relationships: cp.relationships,
            day: cp.day,
            weekday: cp.weekday,
        };
        sim.validate()?;
        Ok(sim)
    }
}
