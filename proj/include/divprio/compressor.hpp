#pragma once

// Compressed-length oracle for NCD. A Compressor maps a byte sequence to its
// compressed size; a CompressionStream measures the size of a growing
// concatenation, which is what the multiset score needs.

#include <divprio/common.hpp>

#include <lz4.h>

#include <cstring>
#include <memory>

namespace divprio {

/// Size of a concatenation x_1 x_2 ... x_k built up one piece at a time.
class CompressionStream {
public:
    virtual ~CompressionStream() = default;

    /// Appends `piece` to the concatenation.
    virtual void append(ByteView piece) = 0;
    /// Compressed size of everything appended so far.
    virtual std::size_t size() const = 0;
    /// Compressed size the concatenation would have after appending `piece`,
    /// without modifying the stream. Safe to call concurrently.
    virtual std::size_t size_with(ByteView piece) const = 0;
};

class Compressor {
public:
    virtual ~Compressor() = default;

    virtual std::string name() const = 0;
    /// Deterministic compressed length in bytes.
    virtual std::size_t compressed_size(ByteView data) const = 0;

    /// Default stream recompresses the whole concatenation on every query.
    virtual std::unique_ptr<CompressionStream> stream(std::size_t capacity_hint = 0) const;
};

namespace detail {
class ConcatStream final : public CompressionStream {
public:
    ConcatStream(const Compressor& c, std::size_t hint) : compressor_(c) {
        buffer_.reserve(hint);
        size_ = compressor_.compressed_size(buffer_);
    }

    void append(ByteView piece) override {
        buffer_.insert(buffer_.end(), piece.begin(), piece.end());
        size_ = compressor_.compressed_size(buffer_);
    }
    std::size_t size() const override { return size_; }
    std::size_t size_with(ByteView piece) const override {
        Bytes tmp;
        tmp.reserve(buffer_.size() + piece.size());
        tmp.insert(tmp.end(), buffer_.begin(), buffer_.end());
        tmp.insert(tmp.end(), piece.begin(), piece.end());
        return compressor_.compressed_size(tmp);
    }

private:
    const Compressor& compressor_;
    Bytes buffer_;
    std::size_t size_ = 0;
};
}  // namespace detail

inline std::unique_ptr<CompressionStream> Compressor::stream(std::size_t capacity_hint) const {
    return std::make_unique<detail::ConcatStream>(*this, capacity_hint);
}

/// LZ4 block format at the default (fast, acceleration 1) setting, library
/// version 1.9.4.
///
/// One-shot sizes come from LZ4_compress_fast. Streams compress each appended
/// piece as a linked block (the previous 64 KiB of the concatenation act as
/// the dictionary, as in the LZ4 frame format with linked blocks), so the size
/// of a stream is the sum of its block sizes and an empty stream has size 0.
class Lz4Compressor final : public Compressor {
public:
    static constexpr int acceleration = 1;

    std::string name() const override { return "lz4"; }

    std::size_t compressed_size(ByteView data) const override {
        if (data.size() > static_cast<std::size_t>(LZ4_MAX_INPUT_SIZE)) {
            throw ConfigError("lz4: input exceeds LZ4_MAX_INPUT_SIZE");
        }
        const int n = static_cast<int>(data.size());
        thread_local Bytes out;
        thread_local std::unique_ptr<LZ4_stream_t> state = std::make_unique<LZ4_stream_t>();
        out.resize(static_cast<std::size_t>(LZ4_compressBound(n)));
        const int written = LZ4_compress_fast_extState(state.get(), reinterpret_cast<const char*>(data.data()),
                                                       reinterpret_cast<char*>(out.data()), n,
                                                       static_cast<int>(out.size()), acceleration);
        if (written <= 0) throw std::runtime_error("lz4: compression failed");
        return static_cast<std::size_t>(written);
    }

    std::unique_ptr<CompressionStream> stream(std::size_t capacity_hint = 0) const override;
};

namespace detail {
class Lz4LinkedStream final : public CompressionStream {
public:
    explicit Lz4LinkedStream(std::size_t hint) : state_(std::make_unique<LZ4_stream_t>()) {
        LZ4_initStream(state_.get(), sizeof(LZ4_stream_t));
        history_.reserve(std::max<std::size_t>(hint, 1024));
    }

    void append(ByteView piece) override {
        if (piece.empty()) return;
        if (history_.size() + piece.size() > history_.capacity()) grow(history_.size() + piece.size());
        const std::size_t offset = history_.size();
        // capacity is reserved, so this never moves the bytes LZ4 points into
        history_.insert(history_.end(), piece.begin(), piece.end());
        total_ += compress_block(*state_, ByteView(history_).subspan(offset));
        blocks_.push_back(piece.size());
    }

    std::size_t size() const override { return total_; }

    std::size_t size_with(ByteView piece) const override {
        if (piece.empty()) return total_;
        LZ4_stream_t scratch;
        std::memcpy(&scratch, state_.get(), sizeof(LZ4_stream_t));
        return total_ + compress_block(scratch, piece);
    }

private:
    static std::size_t compress_block(LZ4_stream_t& state, ByteView block) {
        const int n = static_cast<int>(block.size());
        thread_local Bytes out;
        out.resize(static_cast<std::size_t>(LZ4_compressBound(n)));
        const int written = LZ4_compress_fast_continue(&state, reinterpret_cast<const char*>(block.data()),
                                                       reinterpret_cast<char*>(out.data()), n,
                                                       static_cast<int>(out.size()), Lz4Compressor::acceleration);
        if (written <= 0) throw std::runtime_error("lz4: stream compression failed");
        return static_cast<std::size_t>(written);
    }

    // Rebuilds the stream in a larger buffer by replaying every block.
    void grow(std::size_t needed) {
        Bytes old = std::move(history_);
        history_ = Bytes();
        history_.reserve(std::max(needed, 2 * old.capacity()));
        LZ4_initStream(state_.get(), sizeof(LZ4_stream_t));
        total_ = 0;
        auto sizes = std::move(blocks_);
        blocks_.clear();
        std::size_t pos = 0;
        for (auto len : sizes) {
            append(ByteView(old).subspan(pos, len));
            pos += len;
        }
    }

    std::unique_ptr<LZ4_stream_t> state_;
    Bytes history_;
    std::vector<std::size_t> blocks_;
    std::size_t total_ = 0;
};
}  // namespace detail

inline std::unique_ptr<CompressionStream> Lz4Compressor::stream(std::size_t capacity_hint) const {
    return std::make_unique<detail::Lz4LinkedStream>(capacity_hint);
}

inline std::unique_ptr<Compressor> make_compressor(std::string_view name) {
    if (name == "lz4") return std::make_unique<Lz4Compressor>();
    throw ConfigError("unknown compressor '" + std::string(name) + "' (available: lz4)");
}

}  // namespace divprio
