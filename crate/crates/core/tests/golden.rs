use idge_core::statelang::{diff_states, parse_input, parse_state, serialize_state};
use idge_core::variants::golden;
use idge_core::{next_state, parse_script};

fn split_input(block: &str) -> (&str, &str) {
    let block = block.trim_end();
    let cut = block.rfind('\n').unwrap();
    (&block[..cut], &block[cut + 1..])
}

#[test]
fn golden_input_state_is_canonical() {
    let script = parse_script(golden::SCRIPT).unwrap();
    let (state_text, _) = split_input(golden::INPUT);
    let state = parse_state(state_text, &script).unwrap();
    assert_eq!(serialize_state(&state), state_text);
}

#[test]
fn golden_response_matches_except_the_chip_roster() {
    let script = parse_script(golden::SCRIPT).unwrap();
    let (state_text, input_line) = split_input(golden::INPUT);
    let prev = parse_state(state_text, &script).unwrap();
    let input = parse_input(input_line).unwrap();
    let next = next_state(&prev, Some(&input), &script).unwrap();
    let got = serialize_state(&next);
    let diffs = diff_states(golden::RESPONSE.trim_end(), &got);
    assert_eq!(diffs.len(), 1, "{diffs:?}");
    assert_eq!(diffs[0].key, "chip");
    let want = diffs[0].expected.as_deref().unwrap();
    let have = diffs[0].actual.as_deref().unwrap();
    assert!(have.starts_with(want), "{have} vs {want}");
    assert_eq!(have, "|chip|p1: 10/990|p2: 1000/0 (all-in)|p3: 0/1000|p4: 5/995|p5: 10/990");
}
