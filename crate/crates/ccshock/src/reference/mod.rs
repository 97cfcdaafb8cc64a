//! Grid reference solutions, shifts against them, and the experiments built
//! on top.

pub mod functionals;
pub mod godunov;
pub mod shift;
pub mod nonclassical;
pub mod cone;
