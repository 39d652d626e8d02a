pub mod brinkman;
pub mod entropy;
pub mod gk;
pub mod transport;
