#ifndef NIRSIM_VERSION_HPP
#define NIRSIM_VERSION_HPP

namespace nirsim {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
