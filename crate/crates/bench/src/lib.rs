pub use riesz_mmd;
