#pragma once

#include <vector>

#include "dissolve/manifold.hpp"

namespace dissolve {

// Cartesian product of manifolds. The ambient space is the concatenation of
// the parts' ambient spaces (stored as a single flat column), the residual is
// the stack of the parts' residuals, and every oracle acts block-wise.
//
// Throws EmptyProduct when `parts` is empty.
Manifold make_product(std::vector<Manifold> parts);

}  // namespace dissolve
