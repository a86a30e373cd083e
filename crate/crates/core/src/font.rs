//! 5x7 bitmap font for synthetic plates, and the plate cell layout shared by
//! the renderer and the glyph OCR.
//!
//! A plate is split into seven equal cells across its width. Each cell is a
//! 7x9 unit grid: the 5x7 glyph sits in the middle with one blank unit on
//! every side. Pixels map to units by `floor(u * 7 / cell_width)`.
//!
//! Letters `O` and digit `0` share one glyph, which leaves 35 classes.

/// Width of a glyph in font units.
pub const GLYPH_W: usize = 5;
/// Height of a glyph in font units.
pub const GLYPH_H: usize = 7;
/// Cell size in units, glyph plus one unit of padding around it.
pub const CELL_UNITS_W: usize = GLYPH_W + 2;
pub const CELL_UNITS_H: usize = GLYPH_H + 2;
/// Characters on a plate.
pub const PLATE_CHARS: usize = 7;

/// Every recognisable class. `O` doubles as `0`.
pub const CLASSES: [char; 35] = [
    'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'O', 'P', 'Q', 'R', 'S',
    'T', 'U', 'V', 'W', 'X', 'Y', 'Z', '1', '2', '3', '4', '5', '6', '7', '8', '9',
];

const LETTERS: [[u8; GLYPH_H]; 26] = [
    [
        0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001,
    ], // A
    [
        0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110,
    ], // B
    [
        0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110,
    ], // C
    [
        0b11110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b11110,
    ], // D
    [
        0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111,
    ], // E
    [
        0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000,
    ], // F
    [
        0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111,
    ], // G
    [
        0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001,
    ], // H
    [
        0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110,
    ], // I
    [
        0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100,
    ], // J
    [
        0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001,
    ], // K
    [
        0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111,
    ], // L
    [
        0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001,
    ], // M
    [
        0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001,
    ], // N
    [
        0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110,
    ], // O
    [
        0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000,
    ], // P
    [
        0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101,
    ], // Q
    [
        0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001,
    ], // R
    [
        0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110,
    ], // S
    [
        0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100,
    ], // T
    [
        0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110,
    ], // U
    [
        0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100,
    ], // V
    [
        0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010,
    ], // W
    [
        0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001,
    ], // X
    [
        0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100,
    ], // Y
    [
        0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111,
    ], // Z
];

const DIGITS: [[u8; GLYPH_H]; 9] = [
    [
        0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110,
    ], // 1
    [
        0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111,
    ], // 2
    [
        0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110,
    ], // 3
    [
        0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010,
    ], // 4
    [
        0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110,
    ], // 5
    [
        0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110,
    ], // 6
    [
        0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000,
    ], // 7
    [
        0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110,
    ], // 8
    [
        0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100,
    ], // 9
];

/// Row bitmaps of a character, bit 4 being the leftmost column.
pub fn glyph(c: char) -> Option<&'static [u8; GLYPH_H]> {
    match c {
        'A'..='Z' => Some(&LETTERS[(c as u8 - b'A') as usize]),
        '0' => Some(&LETTERS[(b'O' - b'A') as usize]),
        '1'..='9' => Some(&DIGITS[(c as u8 - b'1') as usize]),
        _ => None,
    }
}

/// Whether unit `(gx, gy)` of a 7x9 cell is ink for `c`.
#[inline]
pub fn cell_unit_ink(c: char, gx: usize, gy: usize) -> bool {
    if !(1..=GLYPH_W).contains(&gx) || !(1..=GLYPH_H).contains(&gy) {
        return false;
    }
    glyph(c).is_some_and(|g| g[gy - 1] >> (GLYPH_W - gx) & 1 == 1)
}

/// Whether plate pixel `(px, py)` is ink when `code` is drawn on a plate of
/// `width x height` pixels.
pub fn plate_ink(
    code: &[char; PLATE_CHARS],
    width: usize,
    height: usize,
    px: usize,
    py: usize,
) -> bool {
    let cell = px * PLATE_CHARS / width;
    let cell_x0 = cell * width / PLATE_CHARS;
    let cell_x1 = (cell + 1) * width / PLATE_CHARS;
    let cw = cell_x1 - cell_x0;
    let gx = (px - cell_x0) * CELL_UNITS_W / cw;
    let gy = py * CELL_UNITS_H / height;
    cell_unit_ink(code[cell], gx, gy)
}

/// Pixel bounds `[x0, x1)` of cell `i` on a plate `width` pixels wide.
pub fn cell_span(i: usize, width: usize) -> (usize, usize) {
    (i * width / PLATE_CHARS, (i + 1) * width / PLATE_CHARS)
}

/// True when `code` is three letters followed by four digits.
pub fn is_plate_code(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == PLATE_CHARS
        && b[..3].iter().all(u8::is_ascii_uppercase)
        && b[3..].iter().all(u8::is_ascii_digit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_five_classes() {
        let mut v = CLASSES.to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), 35);
        assert!(glyph('0').is_some());
        assert_eq!(glyph('0'), glyph('O'));
    }

    #[test]
    fn glyphs_distinct() {
        for (i, a) in CLASSES.iter().enumerate() {
            for b in &CLASSES[i + 1..] {
                assert_ne!(glyph(*a), glyph(*b), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn code_layout() {
        assert!(is_plate_code("ABC1234"));
        assert!(!is_plate_code("AB12345"));
        assert!(!is_plate_code("ABC123"));
        assert!(!is_plate_code("abc1234"));
    }

    #[test]
    fn padding_is_blank() {
        let code: [char; 7] = ['W'; 7];
        // first and last unit rows are padding
        for px in 0..98 {
            assert!(!plate_ink(&code, 98, 18, px, 0));
            assert!(!plate_ink(&code, 98, 18, px, 17));
        }
    }
}
