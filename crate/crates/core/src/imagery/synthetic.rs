//! Deterministic synthetic covers for tests, demos and the comparison table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Diagonal ramp from 0 to 255.
    Gradient,
    /// Independent uniform samples.
    Noise,
    /// 8x8 cells alternating between two seeded levels.
    Checkerboard,
    /// Smooth multi-octave value noise with a little grain; a stand-in for
    /// photographic content.
    Texture,
}

impl Pattern {
    pub const ALL: [Pattern; 4] =
        [Pattern::Gradient, Pattern::Noise, Pattern::Checkerboard, Pattern::Texture];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Gradient => "gradient",
            Pattern::Noise => "noise",
            Pattern::Checkerboard => "checkerboard",
            Pattern::Texture => "texture",
        }
    }

    pub fn render(self, width: usize, height: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = match self {
            Pattern::Gradient => {
                let span = (width + height).saturating_sub(2).max(1);
                (0..height)
                    .flat_map(|y| (0..width).map(move |x| ((x + y) * 255 / span) as u8))
                    .collect()
            }
            Pattern::Noise => (0..width * height).map(|_| rng.gen()).collect(),
            Pattern::Checkerboard => {
                let dark: u8 = rng.gen_range(0..64);
                let light: u8 = rng.gen_range(192..=255);
                (0..height)
                    .flat_map(|y| {
                        (0..width).map(move |x| if (x / 8 + y / 8) % 2 == 0 { dark } else { light })
                    })
                    .collect()
            }
            Pattern::Texture => texture(width, height, &mut rng),
        };
        GrayImage::new(width, height, pixels).expect("non-zero dimensions")
    }
}

impl std::str::FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pattern {s:?}"))
    }
}

/// Uniformly random message bytes derived from `seed`.
pub fn random_message(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..len).map(|_| rng.gen()).collect()
}

fn texture(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut field = vec![0.0f64; width * height];
    let mut amplitude = 1.0;
    let mut total = 0.0;
    for cell in [64usize, 32, 16, 8, 4] {
        let gw = width / cell + 2;
        let gh = height / cell + 2;
        let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen::<f64>()).collect();
        for y in 0..height {
            let gy = y as f64 / cell as f64;
            let (y0, fy) = (gy.floor() as usize, smooth(gy.fract()));
            for x in 0..width {
                let gx = x as f64 / cell as f64;
                let (x0, fx) = (gx.floor() as usize, smooth(gx.fract()));
                let at = |i: usize, j: usize| grid[j * gw + i];
                let top = lerp(at(x0, y0), at(x0 + 1, y0), fx);
                let bottom = lerp(at(x0, y0 + 1), at(x0 + 1, y0 + 1), fx);
                field[y * width + x] += amplitude * lerp(top, bottom, fy);
            }
        }
        total += amplitude;
        amplitude *= 0.55;
    }
    field
        .into_iter()
        .map(|v| {
            let grain: f64 = rng.gen_range(-3.0..3.0);
            // Stretch the contrast so dark and bright extremes both occur.
            let level = (v / total - 0.5) * 1.8 * 255.0 + 127.5 + grain;
            level.round().clamp(0.0, 255.0) as u8
        })
        .collect()
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        for p in Pattern::ALL {
            assert_eq!(p.render(33, 17, 5), p.render(33, 17, 5));
            assert_eq!(p.render(33, 17, 5).len(), 33 * 17);
        }
        assert_ne!(Pattern::Noise.render(16, 16, 1), Pattern::Noise.render(16, 16, 2));
    }

    #[test]
    fn gradient_spans_full_range() {
        let img = Pattern::Gradient.render(64, 64, 0);
        assert_eq!(img.pixels()[0], 0);
        assert_eq!(*img.pixels().last().unwrap(), 255);
    }

    #[test]
    fn names_parse_back() {
        for p in Pattern::ALL {
            assert_eq!(p.name().parse::<Pattern>().unwrap(), p);
        }
        assert!("plaid".parse::<Pattern>().is_err());
    }
}
