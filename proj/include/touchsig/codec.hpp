#pragma once

#include <string>
#include <string_view>

#include "touchsig/model.hpp"

namespace touchsig {

/// One dataset line: `{"interval":…,"label":"…","meta":{…},"seq":{"MX":[…],…}}`.
/// Keys are emitted in sorted order and reals in shortest round-trip form, so
/// equal traces always encode to identical bytes.
std::string encode_trace(const LabeledTrace& trace);

/// Inverse of encode_trace. Throws Error(MalformedRecord) on bad syntax or a
/// missing channel and Error(InvalidTrace) when the decoded trace is invalid.
LabeledTrace decode_trace(std::string_view line);

}  // namespace touchsig
