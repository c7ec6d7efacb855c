pub mod analyze;
pub mod compare;
pub mod demo;
pub mod sample;
pub mod sweep;
