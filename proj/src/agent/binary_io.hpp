#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "steersman/error.hpp"

namespace steersman::agent::io {

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T>);
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw FormatError("truncated checkpoint data");
    return value;
}

template <typename T>
void write_array(std::ostream& out, const T* data, std::size_t count) {
    write_pod<std::uint64_t>(out, count);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void write_vector(std::ostream& out, const std::vector<T>& v) {
    write_array(out, v.data(), v.size());
}

template <typename T>
std::vector<T> read_vector(std::istream& in, std::size_t limit = std::size_t{1} << 34) {
    const auto count = read_pod<std::uint64_t>(in);
    if (count * sizeof(T) > limit) throw FormatError("implausible array length in checkpoint");
    std::vector<T> v(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw FormatError("truncated checkpoint array");
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) { write_array(out, s.data(), s.size()); }

inline std::string read_string(std::istream& in) {
    const auto v = read_vector<char>(in);
    return {v.begin(), v.end()};
}

}  // namespace steersman::agent::io
