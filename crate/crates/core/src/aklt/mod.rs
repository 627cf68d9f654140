pub mod blocks;
pub mod spin;
pub mod split;
pub mod vbs;
pub mod verify;
