pub mod ff;
pub mod poly;
pub mod semilinear;
pub mod variety;
pub mod hassewitt;
pub mod modrep;
pub mod mu;
pub mod verify;
pub mod cli;
