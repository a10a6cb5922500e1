#pragma once

#include <optional>

#include "gridcert/error.hpp"

// Kind of the gridcert::Error thrown by f, or nullopt when f returns normally.
template <class F>
std::optional<gridcert::ErrorKind> thrown_kind(F&& f) {
    try {
        f();
    } catch (const gridcert::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}
