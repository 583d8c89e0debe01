pub mod boolean;
pub mod driver;
pub mod lang;
pub mod paths;
pub mod repair;
pub mod synth;
pub mod transform;
