pub mod affinity;
pub mod assignment;
pub mod bench;
pub mod config;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod pose;
pub mod reconstruction;
pub mod simulator;
pub mod skeleton;
pub mod tracker;
