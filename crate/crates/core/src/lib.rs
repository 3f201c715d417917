//! Agent-based city simulator: needs, habits and obligations drive action
//! choice; agents move on a tile map over walking, PMV and bus networks; a
//! batched decision pipeline talks to a pluggable backend.

pub mod catalog;
pub mod decision;
pub mod city_map;
pub mod habits;
pub mod needs;
pub mod obligations;
pub mod persona;
pub mod scheduler;
pub mod social;
pub mod telemetry;
pub mod time;
pub mod transport;
