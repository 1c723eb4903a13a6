//! Segment-intersection geometry, twice: a pure plaintext oracle and the
//! same decision procedure over ciphertexts.
//!
//! The primitive is the orientation of an ordered point triplet, classified
//! by the sign of the cross-product determinant
//! `d = (b.y - a.y)(c.x - b.x) - (b.x - a.x)(c.y - b.y)`
//! with the convention `d > 0` ⇒ clockwise. Two segments intersect when the
//! endpoint orientations differ on both sides (general case), or when all
//! four triplets are collinear and an axis-projection overlap exists.
//!
//! In the encrypted variant Alice drives the algorithm on her plaintext
//! segment against Bob's encrypted one. Differences and plaintext-by-
//! ciphertext products stay local homomorphic work; only products of two
//! encrypted factors go through `secure_mult`, and each orientation resolves
//! through a single `secure_sign`.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::paillier::{
    add, add_plain, encrypt, neg, scalar_mul, trivial_encrypt, Ciphertext, PublicKey, SignedCoord,
};
use crate::subprotocols::ProtocolCtx;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Point {
    pub x: SignedCoord,
    pub y: SignedCoord,
}

impl Point {
    pub fn new(x: i64, y: i64) -> Result<Point> {
        Ok(Point {
            x: SignedCoord::new(x)?,
            y: SignedCoord::new(y)?,
        })
    }

    fn xi(&self) -> i64 {
        self.x.value()
    }

    fn yi(&self) -> i64 {
        self.y.value()
    }
}

/// A point of Bob's route, both coordinates encrypted under the same key.
#[derive(Clone, Debug)]
pub struct EncPoint {
    pub x: Ciphertext,
    pub y: Ciphertext,
}

impl EncPoint {
    pub fn new(x: Ciphertext, y: Ciphertext) -> Result<EncPoint> {
        if x.key_id() != y.key_id() {
            return Err(Error::KeyMismatch);
        }
        Ok(EncPoint { x, y })
    }

    pub fn encrypt(pk: &PublicKey, p: &Point) -> Result<EncPoint> {
        Ok(EncPoint {
            x: encrypt(pk, &pk.encode(&BigInt::from(p.xi()))?)?,
            y: encrypt(pk, &pk.encode(&BigInt::from(p.yi()))?)?,
        })
    }
}

/// Directed segment between two plaintext points. Coinciding endpoints are
/// legal input and behave as a point.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Segment {
        Segment { p, q }
    }
}

#[derive(Clone, Debug)]
pub struct EncSegment {
    pub p: EncPoint,
    pub q: EncPoint,
}

/// Polyline: `k` points form `k - 1` consecutive segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    points: Vec<Point>,
}

impl Path {
    pub fn new(points: Vec<Point>) -> Result<Path> {
        if points.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(Path { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.points
            .windows(2)
            .map(|w| Segment::new(w[0], w[1]))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct EncPath {
    points: Vec<EncPoint>,
}

impl EncPath {
    pub fn new(points: Vec<EncPoint>) -> Result<EncPath> {
        if points.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(EncPath { points })
    }

    pub fn encrypt(pk: &PublicKey, path: &Path) -> Result<EncPath> {
        let points = path
            .points()
            .iter()
            .map(|p| EncPoint::encrypt(pk, p))
            .collect::<Result<Vec<_>>>()?;
        EncPath::new(points)
    }

    pub fn points(&self) -> &[EncPoint] {
        &self.points
    }

    pub fn segments(&self) -> Vec<EncSegment> {
        self.points
            .windows(2)
            .map(|w| EncSegment {
                p: w[0].clone(),
                q: w[1].clone(),
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
    Collinear,
}

fn classify(d: i128) -> Orientation {
    match d.cmp(&0) {
        std::cmp::Ordering::Greater => Orientation::Clockwise,
        std::cmp::Ordering::Less => Orientation::Counterclockwise,
        std::cmp::Ordering::Equal => Orientation::Collinear,
    }
}

fn classify_sign(sign: i8) -> Orientation {
    match sign {
        1 => Orientation::Clockwise,
        -1 => Orientation::Counterclockwise,
        _ => Orientation::Collinear,
    }
}

pub fn determinant_plain(a: &Point, b: &Point, c: &Point) -> i128 {
    let (ax, ay) = (a.xi() as i128, a.yi() as i128);
    let (bx, by) = (b.xi() as i128, b.yi() as i128);
    let (cx, cy) = (c.xi() as i128, c.yi() as i128);
    (by - ay) * (cx - bx) - (bx - ax) * (cy - by)
}

/// Exact three-way orientation of the ordered triplet `(a, b, c)`.
pub fn orientation_plain(a: &Point, b: &Point, c: &Point) -> Orientation {
    classify(determinant_plain(a, b, c))
}

/// Given `p` collinear with `s`, is `p` within `s`'s axis projections?
pub fn on_segment_plain(p: &Point, s: &Segment) -> bool {
    let (minx, maxx) = (s.p.xi().min(s.q.xi()), s.p.xi().max(s.q.xi()));
    let (miny, maxy) = (s.p.yi().min(s.q.yi()), s.p.yi().max(s.q.yi()));
    minx <= p.xi() && p.xi() <= maxx && miny <= p.yi() && p.yi() <= maxy
}

/// The reference oracle: do two segments intersect?
pub fn intersect_plain(s1: &Segment, s2: &Segment) -> bool {
    let o1 = orientation_plain(&s1.p, &s1.q, &s2.p);
    let o2 = orientation_plain(&s1.p, &s1.q, &s2.q);
    let o3 = orientation_plain(&s2.p, &s2.q, &s1.p);
    let o4 = orientation_plain(&s2.p, &s2.q, &s1.q);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    if o1 == Orientation::Collinear
        && o2 == Orientation::Collinear
        && o3 == Orientation::Collinear
        && o4 == Orientation::Collinear
    {
        return on_segment_plain(&s2.p, s1)
            || on_segment_plain(&s2.q, s1)
            || on_segment_plain(&s1.p, s2)
            || on_segment_plain(&s1.q, s2);
    }
    false
}

/// A point that is either local plaintext or a ciphertext pair.
#[derive(Clone, Copy, Debug)]
pub enum PointRef<'a> {
    Plain(&'a Point),
    Enc(&'a EncPoint),
}

/// A segment that is either local plaintext or encrypted.
#[derive(Clone, Copy, Debug)]
pub enum SegmentRef<'a> {
    Plain(&'a Segment),
    Enc(&'a EncSegment),
}

/// Intermediate value in an encrypted arithmetic expression: either still
/// plaintext (both inputs were local) or a ciphertext.
#[derive(Clone, Debug)]
enum Term {
    Plain(i128),
    Enc(Ciphertext),
}

fn coord(p: PointRef<'_>, x_axis: bool) -> Term {
    match p {
        PointRef::Plain(pt) => Term::Plain(if x_axis { pt.xi() } else { pt.yi() } as i128),
        PointRef::Enc(pt) => Term::Enc(if x_axis { pt.x.clone() } else { pt.y.clone() }),
    }
}

fn sub_terms(pk: &PublicKey, a: &Term, b: &Term) -> Result<Term> {
    Ok(match (a, b) {
        (Term::Plain(x), Term::Plain(y)) => Term::Plain(x - y),
        (Term::Enc(cx), Term::Plain(y)) => {
            Term::Enc(add_plain(pk, cx, &pk.encode(&BigInt::from(-*y))?)?)
        }
        (Term::Plain(x), Term::Enc(cy)) => {
            Term::Enc(add_plain(pk, &neg(pk, cy)?, &pk.encode(&BigInt::from(*x))?)?)
        }
        (Term::Enc(cx), Term::Enc(cy)) => Term::Enc(add(pk, cx, &neg(pk, cy)?)?),
    })
}

fn mul_terms<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    a: &Term,
    b: &Term,
) -> Result<Term> {
    Ok(match (a, b) {
        (Term::Plain(x), Term::Plain(y)) => Term::Plain(x * y),
        (Term::Plain(k), Term::Enc(c)) | (Term::Enc(c), Term::Plain(k)) => {
            Term::Enc(scalar_mul(ctx.pk(), c, &BigInt::from(*k))?)
        }
        (Term::Enc(cx), Term::Enc(cy)) => Term::Enc(ctx.secure_mult(cx, cy)?),
    })
}

/// Orientation of a mixed plaintext/encrypted triplet. Falls through to the
/// plaintext oracle when nothing is encrypted; otherwise the determinant is
/// assembled homomorphically (`secure_mult` only where both difference
/// factors are encrypted) and classified with one `secure_sign`.
pub fn enc_orientation<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    a: PointRef<'_>,
    b: PointRef<'_>,
    c: PointRef<'_>,
) -> Result<Orientation> {
    if let (PointRef::Plain(pa), PointRef::Plain(pb), PointRef::Plain(pc)) = (a, b, c) {
        return Ok(orientation_plain(pa, pb, pc));
    }
    let f1 = sub_terms(ctx.pk(), &coord(b, false), &coord(a, false))?;
    let f2 = sub_terms(ctx.pk(), &coord(c, true), &coord(b, true))?;
    let f3 = sub_terms(ctx.pk(), &coord(b, true), &coord(a, true))?;
    let f4 = sub_terms(ctx.pk(), &coord(c, false), &coord(b, false))?;
    let p1 = mul_terms(ctx, &f1, &f2)?;
    let p2 = mul_terms(ctx, &f3, &f4)?;
    match sub_terms(ctx.pk(), &p1, &p2)? {
        Term::Plain(d) => Ok(classify(d)),
        Term::Enc(cd) => Ok(classify_sign(ctx.secure_sign(&cd)?)),
    }
}

/// `[[p.y * q.x - p.x * q.y]]` for an encrypted segment: the only part of
/// the determinants about that segment that needs ciphertext products. Both
/// orientation tests against the segment reuse it.
fn enc_segment_cross<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    seg: &EncSegment,
) -> Result<Ciphertext> {
    let cy_dx = ctx.secure_mult(&seg.p.y, &seg.q.x)?;
    let cx_dy = ctx.secure_mult(&seg.p.x, &seg.q.y)?;
    add(ctx.pk(), &cy_dx, &neg(ctx.pk(), &cx_dy)?)
}

/// Orientation of `(seg.p, seg.q, point)` for an encrypted segment and a
/// plaintext point, with the segment's cross term already computed:
/// `d = point.x*(q.y - p.y) - point.y*(q.x - p.x) + cross`.
fn enc_orientation_about_segment<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    seg: &EncSegment,
    point: &Point,
    cross: &Ciphertext,
) -> Result<Orientation> {
    let pk = ctx.pk().clone();
    let dy = add(&pk, &seg.q.y, &neg(&pk, &seg.p.y)?)?;
    let dx = add(&pk, &seg.q.x, &neg(&pk, &seg.p.x)?)?;
    let tx = scalar_mul(&pk, &dy, &BigInt::from(point.xi()))?;
    let ty = scalar_mul(&pk, &dx, &BigInt::from(-point.yi()))?;
    let d = add(&pk, &add(&pk, &tx, &ty)?, cross)?;
    Ok(classify_sign(ctx.secure_sign(&d)?))
}

fn lift_plain<S: std::io::Read + std::io::Write>(
    ctx: &ProtocolCtx<S>,
    v: i64,
) -> Result<Ciphertext> {
    let m = ctx.pk().encode(&BigInt::from(v))?;
    trivial_encrypt(ctx.pk(), &m)
}

/// Axis-projection membership test for mixed plaintext/encrypted inputs;
/// the caller has already established collinearity.
///
/// With a plaintext segment, min/max are local, so membership costs two
/// `secure_leq` per axis against the encrypted point. With an encrypted
/// segment, the endpoints cannot be ordered locally; instead the two signs
/// of `p - endpoint` are fetched per axis, and `p` is inside iff they
/// disagree or one is zero.
pub fn enc_on_segment<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    p: PointRef<'_>,
    s: SegmentRef<'_>,
) -> Result<bool> {
    match (p, s) {
        (PointRef::Plain(pt), SegmentRef::Plain(seg)) => Ok(on_segment_plain(pt, seg)),
        (PointRef::Enc(pt), SegmentRef::Plain(seg)) => {
            let (minx, maxx) = (seg.p.xi().min(seg.q.xi()), seg.p.xi().max(seg.q.xi()));
            let (miny, maxy) = (seg.p.yi().min(seg.q.yi()), seg.p.yi().max(seg.q.yi()));
            let lo_x = lift_plain(ctx, minx)?;
            let hi_x = lift_plain(ctx, maxx)?;
            let lo_y = lift_plain(ctx, miny)?;
            let hi_y = lift_plain(ctx, maxy)?;
            Ok(ctx.secure_leq(&lo_x, &pt.x)?
                && ctx.secure_leq(&pt.x, &hi_x)?
                && ctx.secure_leq(&lo_y, &pt.y)?
                && ctx.secure_leq(&pt.y, &hi_y)?)
        }
        (pt, seg_ref) => {
            let (cpx, cpy) = match pt {
                PointRef::Plain(p) => (lift_plain(ctx, p.xi())?, lift_plain(ctx, p.yi())?),
                PointRef::Enc(p) => (p.x.clone(), p.y.clone()),
            };
            let seg = match seg_ref {
                SegmentRef::Enc(s) => s,
                SegmentRef::Plain(_) => unreachable!("plain/plain handled above"),
            };
            let pk = ctx.pk().clone();
            let axis = |ctx: &mut ProtocolCtx<S>, cp: &Ciphertext, ep: &Ciphertext, eq: &Ciphertext| -> Result<bool> {
                let s1 = ctx.secure_sign(&add(&pk, cp, &neg(&pk, ep)?)?)?;
                let s2 = ctx.secure_sign(&add(&pk, cp, &neg(&pk, eq)?)?)?;
                Ok(i16::from(s1) * i16::from(s2) <= 0)
            };
            Ok(axis(ctx, &cpx, &seg.p.x, &seg.q.x)? && axis(ctx, &cpy, &seg.p.y, &seg.q.y)?)
        }
    }
}

/// Does Alice's plaintext segment intersect Bob's encrypted one?
///
/// General case: exactly four `secure_sign` rounds (one per orientation) and
/// two `secure_mult` rounds (the encrypted segment's shared cross term). The
/// collinear branch adds axis comparisons only when all four orientations
/// come back collinear, short-circuiting on the first hit.
pub fn enc_intersect<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    sa: &Segment,
    sb: &EncSegment,
) -> Result<bool> {
    let o1 = enc_orientation(
        ctx,
        PointRef::Plain(&sa.p),
        PointRef::Plain(&sa.q),
        PointRef::Enc(&sb.p),
    )?;
    let o2 = enc_orientation(
        ctx,
        PointRef::Plain(&sa.p),
        PointRef::Plain(&sa.q),
        PointRef::Enc(&sb.q),
    )?;
    let cross = enc_segment_cross(ctx, sb)?;
    let o3 = enc_orientation_about_segment(ctx, sb, &sa.p, &cross)?;
    let o4 = enc_orientation_about_segment(ctx, sb, &sa.q, &cross)?;

    if o1 != o2 && o3 != o4 {
        return Ok(true);
    }
    if o1 == Orientation::Collinear
        && o2 == Orientation::Collinear
        && o3 == Orientation::Collinear
        && o4 == Orientation::Collinear
    {
        return Ok(enc_on_segment(ctx, PointRef::Enc(&sb.p), SegmentRef::Plain(sa))?
            || enc_on_segment(ctx, PointRef::Enc(&sb.q), SegmentRef::Plain(sa))?
            || enc_on_segment(ctx, PointRef::Plain(&sa.p), SegmentRef::Enc(sb))?
            || enc_on_segment(ctx, PointRef::Plain(&sa.q), SegmentRef::Enc(sb))?);
    }
    Ok(false)
}

/// Indices of Alice's segments that intersect any of Bob's. Evaluation is
/// row-major over `(i, j)` with no early exit across `j`, so the transcript
/// length for a given geometry depends only on the orientation outcomes.
pub fn compare_paths<S: std::io::Read + std::io::Write>(
    ctx: &mut ProtocolCtx<S>,
    alice: &Path,
    bob: &EncPath,
) -> Result<BTreeSet<usize>> {
    let mut collisions = BTreeSet::new();
    let bob_segments = bob.segments();
    for (i, sa) in alice.segments().iter().enumerate() {
        for sb in &bob_segments {
            if enc_intersect(ctx, sa, sb)? {
                collisions.insert(i);
            }
        }
    }
    Ok(collisions)
}
