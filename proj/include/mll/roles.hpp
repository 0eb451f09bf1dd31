#pragma once

#include <string>
#include <vector>

namespace mll {

/// Exposure X, mediators W (treated jointly as one composite), response Y.
struct Roles {
    std::string exposure;
    std::vector<std::string> mediators;
    std::string response;
};

}  // namespace mll
