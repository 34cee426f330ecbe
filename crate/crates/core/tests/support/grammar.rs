//! Random well-formed text for a Brahmic script, built from its table.
//!
//! Words are sequences of syllables: an optional consonant cluster joined by
//! virama, then either the inherent vowel, a vowel sign, or a final virama,
//! then an optional sign. Independent vowels only start a syllable when the
//! previous one ended in a vowel. Lines come out in NFC.

use rand::Rng;
use unicode_normalization::UnicodeNormalization;
use wxbridge_core::table::CharClass;
use wxbridge_core::ScriptTable;

pub struct Grammar {
    consonants: Vec<char>,
    // consonants whose base + nukta spelling is not another letter's WX
    nuktable: Vec<char>,
    vowels: Vec<char>,
    matras: Vec<char>,
    signs: Vec<char>,
    digits: Vec<char>,
    nukta: Option<char>,
    virama: char,
}

impl Grammar {
    pub fn new(table: &ScriptTable) -> Grammar {
        let of = |class: CharClass| -> Vec<char> {
            table
                .entries()
                .filter(|(_, e)| e.class == class)
                .map(|(c, _)| c)
                .collect()
        };
        let consonants = of(CharClass::Consonant);
        let taken: Vec<&str> = table
            .entries()
            .filter(|(_, e)| e.class == CharClass::Consonant)
            .map(|(_, e)| e.wx.as_str())
            .collect();
        let nuktable = consonants
            .iter()
            .copied()
            .filter(|&c| {
                let z = format!("{}Z", table.get(c).expect("listed").wx);
                !taken.contains(&z.as_str())
            })
            .collect();
        Grammar {
            consonants,
            nuktable,
            vowels: of(CharClass::Vowel),
            matras: of(CharClass::Matra),
            signs: of(CharClass::Sign),
            digits: of(CharClass::Digit),
            nukta: of(CharClass::Nukta).first().copied(),
            virama: table.virama().expect("brahmic table has a virama"),
        }
    }

    fn pick<R: Rng>(rng: &mut R, from: &[char]) -> char {
        from[rng.random_range(0..from.len())]
    }

    fn consonant<R: Rng>(&self, rng: &mut R, out: &mut String) {
        let c = Self::pick(rng, &self.consonants);
        out.push(c);
        if let Some(n) = self.nukta {
            if self.nuktable.contains(&c) && rng.random_bool(0.05) {
                out.push(n);
            }
        }
    }

    fn word<R: Rng>(&self, rng: &mut R) -> String {
        let mut out = String::new();
        let syllables = rng.random_range(1..=4);
        // true when the text so far ends in a vowel (inherent or explicit)
        let mut after_vowel = true;
        for i in 0..syllables {
            if after_vowel && rng.random_bool(0.15) {
                out.push(Self::pick(rng, &self.vowels));
            } else {
                for _ in 0..rng.random_range(0..=2) {
                    self.consonant(rng, &mut out);
                    out.push(self.virama);
                }
                self.consonant(rng, &mut out);
                match rng.random_range(0..10) {
                    0..=4 => out.push(Self::pick(rng, &self.matras)),
                    5 if i + 1 == syllables => {
                        out.push(self.virama);
                        return out;
                    }
                    _ => {}
                }
            }
            after_vowel = true;
            if rng.random_bool(0.1) {
                out.push(Self::pick(rng, &self.signs));
            }
        }
        out
    }

    /// A line of words, occasionally with a number.
    pub fn line<R: Rng>(&self, rng: &mut R) -> String {
        let n = rng.random_range(1..=6);
        let mut words = Vec::with_capacity(n);
        for _ in 0..n {
            if !self.digits.is_empty() && rng.random_bool(0.05) {
                let len = rng.random_range(1..=4);
                words.push((0..len).map(|_| Self::pick(rng, &self.digits)).collect());
            } else {
                words.push(self.word(rng));
            }
        }
        // NFC is the spelling the decoder reproduces
        words.join(" ").nfc().collect()
    }
}
