// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

// Little-endian primitives for the versioned artifact files.

#pragma once

#include "offlang/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace offlang::bin {

class Writer {
public:
    template <class T>
        requires std::is_integral_v<T>
    void put(T v) {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
    void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
    void put_bytes(std::string_view s) { buf_.append(s); }
    // Length-prefixed (u32) byte string.
    void put_str(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }

    const std::string& bytes() const noexcept { return buf_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(path);
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw IoError(path);
    }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string bytes, std::string origin = "<memory>")
        : buf_(std::move(bytes)), origin_(std::move(origin)) {}

    static Reader from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError(path);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return Reader(std::move(bytes), path);
    }

    template <class T>
        requires std::is_integral_v<T>
    T get() {
        need(sizeof(T));
        using U = std::make_unsigned_t<T>;
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string get_str() { return get_bytes(get<std::uint32_t>()); }

    void expect_magic(std::string_view magic) {
        if (get_bytes(magic.size()) != magic) fail("bad magic, expected " + std::string(magic));
    }
    bool at_end() const noexcept { return pos_ == buf_.size(); }
    [[noreturn]] void fail(const std::string& what) const {
        throw DataError(origin_ + ": " + what);
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) fail("truncated file");
    }

    std::string buf_;
    std::string origin_;
    std::size_t pos_ = 0;
};

// FNV-1a, used to tie a model file to the vectorizer it was trained with.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace offlang::bin
