pub mod dimension;
pub mod entanglement;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod linalg;
pub mod memory;
pub mod reservoir;
pub mod seeding;
