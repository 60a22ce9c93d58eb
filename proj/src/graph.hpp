#pragma once

#include "stcr/autodiff.hpp"

namespace stcr::detail {

Var make_node(Tensor value, std::string op, std::vector<Var> parents, BackwardFn fn);

}  // namespace stcr::detail
