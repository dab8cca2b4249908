#pragma once

namespace lingauss {
const char* version() noexcept;
}
