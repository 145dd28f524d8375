"""Wave scattering with time-dependent permittivity and memory."""
