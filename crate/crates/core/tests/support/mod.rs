pub mod noisy;
pub mod oracle;
pub mod plans;
