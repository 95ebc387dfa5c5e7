//! Keeps the guide in `book/` honest: every chapter is attached as a doc
//! comment here, so `cargo test --doc` compiles and runs each fenced Rust
//! snippet the book shows.

#[cfg(doctest)]
mod chapters {
    #[doc = include_str!("../../../book/src/channel-model.md")]
    pub struct ChannelModel;

    #[doc = include_str!("../../../book/src/beamforming.md")]
    pub struct Beamforming;

    #[doc = include_str!("../../../book/src/link-adaptation.md")]
    pub struct LinkAdaptation;

    #[doc = include_str!("../../../book/src/slot-engine.md")]
    pub struct SlotEngine;

    #[doc = include_str!("../../../book/src/campaigns.md")]
    pub struct Campaigns;

    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
}
