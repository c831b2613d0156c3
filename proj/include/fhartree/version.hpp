#ifndef FHARTREE_VERSION_HPP
#define FHARTREE_VERSION_HPP

namespace fhartree {
inline constexpr const char* version_string = "fhartree 0.1.0";
}

#endif
