//! Exact Čech–simplicial calculus for bundle gerbes over finite simplicial complexes.

pub mod cech;
pub mod cohomology;
pub mod complex;
pub mod deligne;
pub mod gerbe;
pub mod intlinalg;
pub mod io;
pub mod lifting;
