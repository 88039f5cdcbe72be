#pragma once

#include "nesdf/common.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace nesdf {

/// Little-endian primitive writer.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { little(v); }
    void u64(std::uint64_t v) { little(v); }
    void f64(double v) { little(std::bit_cast<std::uint64_t>(v)); }

private:
    template <typename U>
    void little(U v)
    {
        std::array<char, sizeof(U)> buf;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out_.write(buf.data(), buf.size());
    }

    std::ostream& out_;
};

/// Little-endian primitive reader; truncation raises FormatError.
class BinaryReader {
public:
    BinaryReader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

    std::string bytes(std::size_t n)
    {
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        check();
        return s;
    }
    std::uint8_t u8()
    {
        const int c = in_.get();
        check();
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() { return little<std::uint32_t>(); }
    std::uint64_t u64() { return little<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(little<std::uint64_t>()); }

    bool atEnd() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    template <typename U>
    U little()
    {
        std::array<unsigned char, sizeof(U)> buf;
        in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
        check();
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(buf[i]) << (8 * i);
        return v;
    }

    void check()
    {
        if (!in_)
            throw FormatError(context_ + ": unexpected end of file");
    }

    std::istream& in_;
    std::string context_;
};

} // namespace nesdf
