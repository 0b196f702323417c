//! Mask-driven image manipulations: background desaturation and a
//! two-layer parallax wiggle rendered as an animated GIF.

mod desaturate;
mod wiggle;

pub use desaturate::desaturate_background;
pub use wiggle::{
    encode_gif, frame_offset, palette_index, uniform_palette, wiggle_frames, wiggle_gif,
    WiggleParams,
};
