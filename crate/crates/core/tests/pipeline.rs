//! File-level round trips through the library: fixture -> matrix file ->
//! alignment -> SRT -> evaluation.

use subalign::align::{align, AlignInput, AlignOptions, Method};
use subalign::eval::{conformity, shift_stats, DEFAULT_CPL, DEFAULT_CPS, PERCEPTION_THRESHOLD_MS};
use subalign::signal::{format_attention, parse_matrix, FrameTimeMap};
use subalign::subtitle::{assemble_document, parse_srt, tokens_from_tagged_text, write_srt};
use subalign::synth::{gen_block_diag, SyntheticAlignment};

#[test]
fn noisy_fixture_through_files() {
    let spec = SyntheticAlignment::random(6, 150, 0.05, 42).unwrap();
    let (a, tokens) = gen_block_diag(&spec).unwrap();
    let reread = parse_matrix(&format_attention(&a)).unwrap().into_attention().unwrap();
    assert_eq!(reread, a);
    let tokens = tokens_from_tagged_text(&tokens.to_tagged_text()).unwrap();

    let truth = assemble_document(&tokens, &spec.true_timings(FrameTimeMap::default()).unwrap()).unwrap();
    for method in [Method::Dtw, Method::Sbaam] {
        let doc = align(method, &AlignInput::Attention(reread.clone()), &tokens, &AlignOptions::default()).unwrap();
        let srt = write_srt(&doc);
        assert_eq!(parse_srt(&srt).unwrap(), doc);

        // one 40 ms frame of error stays under the perception threshold
        let shifts = shift_stats(&doc, &truth, PERCEPTION_THRESHOLD_MS).unwrap();
        assert_eq!(shifts.edited_avg_pct, 0.0, "{method}: {shifts:?}");
        assert_eq!(doc.blocks().last().unwrap().end(), truth.blocks().last().unwrap().end());
    }
}

#[test]
fn explicit_frame_times_drive_timestamps() {
    let text = "4 4 frame_times\n100\t250\t400\t1000\n1\t1\t0\t0\n0\t1\t0\t0\n0\t0\t1\t0\n0\t0\t0\t1\n";
    let a = parse_matrix(text).unwrap().into_attention().unwrap();
    let tokens = tokens_from_tagged_text("Hallo <eol> Welt").unwrap();
    let doc = align(Method::Dtw, &AlignInput::Attention(a), &tokens, &AlignOptions {
        preprocess: false,
        ..AlignOptions::default()
    })
    .unwrap();
    assert_eq!(write_srt(&doc), "1\n00:00:00,000 --> 00:00:01,000\nHallo\nWelt\n");
    let report = conformity(&doc, DEFAULT_CPL, DEFAULT_CPS).unwrap();
    assert_eq!(report.blocks[0].cps, 10.0);
}
