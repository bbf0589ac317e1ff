pub mod asymptotics;
pub mod cli;
pub mod effcap;
pub mod fading;
pub mod quad;
pub mod queuesim;
pub mod roots;
pub mod sweep;
