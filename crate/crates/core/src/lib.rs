pub mod bench;
pub mod dem_decode;
pub mod frame_sim;
pub mod lindblad;
pub mod pauli;
pub mod pulse;
pub mod surface;
pub mod twirl;
