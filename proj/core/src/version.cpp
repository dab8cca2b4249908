#include "lingauss/version.hpp"

namespace lingauss {
const char* version() noexcept { return LINGAUSS_VERSION_STRING; }
}  // namespace lingauss
