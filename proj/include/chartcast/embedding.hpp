#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chartcast/hour_stamp.hpp"

namespace chartcast {

enum class SourceKind { Text, Image, RawNumeric };

// Fixed-width feature vector, float32 end to end (the cache's on-disk
// format); the forecaster upcasts when building batches.
struct Embedding {
    std::vector<float> values;
    SourceKind kind = SourceKind::RawNumeric;

    std::size_t dim() const { return values.size(); }
};

// Ordered encoder outputs for one model window, paired with its label.
struct EmbeddingSequence {
    std::vector<Embedding> items;
    HourStamp anchor;
    int label = 0;

    std::size_t length() const { return items.size(); }
    std::size_t dim() const { return items.empty() ? 0 : items[0].dim(); }
};

enum class EncoderKind { PretrainedText, PretrainedImage, Identity };

struct EncoderSpec {
    EncoderKind kind = EncoderKind::Identity;
    std::string checkpoint_id;   // resolved against the checkpoint directory
    bool frozen = true;          // weights are never updated
    bool use_projection = false; // pooled output by default
};

std::string encoder_kind_name(EncoderKind kind);

}  // namespace chartcast
