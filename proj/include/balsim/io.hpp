#pragma once

#include "balsim/diffusion.hpp"
#include "balsim/engine.hpp"
#include "balsim/oracle.hpp"

#include <iosfwd>
#include <string>

namespace balsim {

// Deterministic shortest-faithful rendering of a double; CSV bodies must be
// byte-identical across reruns with one seed.
std::string format_double(double value);

// Filesystem-safe policy or label name.
std::string sanitize_name(const std::string& name);

// "time,Q1,...,Qb,L" rows, one per epoch.
void write_path_csv(std::ostream& out, const SystemPath& path);

// "time,X1,...,Xb" rows.
void write_scaled_csv(std::ostream& out, const ScaledPath& path);

// "Q1,...,Qb,probability" rows over the whole state space.
void write_stationary_csv(std::ostream& out, const StateSpace& space,
                          std::span<const double> pi);

// "t,x1,x2,u1" rows on the integration grid.
void write_diffusion_csv(std::ostream& out, const DiffusionPath& path);

} // namespace balsim
