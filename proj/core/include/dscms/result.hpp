#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dscms {

struct Error {
    std::string code;
    std::string message;
    /// Element, line or field the error refers to; empty when not applicable.
    std::string location;

    [[nodiscard]] static Error make(std::string code, std::string message, std::string location = {}) {
        return Error{std::move(code), std::move(message), std::move(location)};
    }

    friend bool operator==(const Error&, const Error&) = default;
};

/// Either a value or a non-empty list of errors.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : state_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
    Result(Error error) : state_(std::vector<Error>{std::move(error)}) {}  // NOLINT(google-explicit-constructor)
    Result(std::vector<Error> errors) : state_(std::move(errors)) {}  // NOLINT(google-explicit-constructor)

    [[nodiscard]] bool ok() const noexcept { return std::holds_alternative<T>(state_); }
    explicit operator bool() const noexcept { return ok(); }

    [[nodiscard]] T& value() & { return std::get<T>(state_); }
    [[nodiscard]] const T& value() const& { return std::get<T>(state_); }
    [[nodiscard]] T&& value() && { return std::get<T>(std::move(state_)); }

    [[nodiscard]] const std::vector<Error>& errors() const& { return std::get<std::vector<Error>>(state_); }
    [[nodiscard]] std::vector<Error>&& errors() && { return std::get<std::vector<Error>>(std::move(state_)); }

    [[nodiscard]] const Error& error() const { return errors().front(); }

private:
    std::variant<T, std::vector<Error>> state_;
};

/// Result for operations that produce no value.
struct Unit {
    friend bool operator==(Unit, Unit) = default;
};

}  // namespace dscms
