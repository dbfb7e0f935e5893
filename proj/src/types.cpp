#include "lecturelens/types.hpp"

#include <cmath>

#include "lecturelens/error.hpp"

namespace lecturelens {

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Parse: return "parse";
        case ErrorCategory::Validation: return "validation";
        case ErrorCategory::Transport: return "transport";
        case ErrorCategory::Backend: return "backend";
        case ErrorCategory::Analysis: return "analysis";
    }
    return "unknown";
}

const char* to_string(Category c) {
    return c == Category::HeadUp ? "up" : "down";
}

Category category_from_string(const std::string& s) {
    if (s == "up") return Category::HeadUp;
    if (s == "down") return Category::HeadDown;
    throw Error(ErrorCategory::Parse, "unknown category \"" + s + "\" (want \"up\" or \"down\")");
}

int minute_count(double duration_s) {
    return static_cast<int>(std::ceil(duration_s / 60.0));
}

}  // namespace lecturelens
