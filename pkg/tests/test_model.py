import json

import numpy as np
import pytest

from mvrs.model import (
    FrameRecord,
    SegmentGroup,
    VideoAsset,
    VideoMetadata,
    dump_catalog,
    ensure_unit_vector,
    load_catalog,
    validate_catalog,
)


def make_asset(video_id="v1", fps=4.0, frame_count=10, **meta):
    return VideoAsset(
        video_id=video_id,
        source_uri=f"mem://{video_id}",
        fps=fps,
        frame_count=frame_count,
        metadata=VideoMetadata(**meta),
    )


def frames_for(asset):
    return [
        FrameRecord(video_id=asset.video_id, frame_index=i, timestamp_s=i / asset.fps)
        for i in range(asset.frame_count)
    ]


class TestValidateCatalog:
    def test_consistent_catalog_has_empty_report(self):
        asset = make_asset()
        assert validate_catalog([asset], frames_for(asset)) == []

    def test_duplicate_video_id_reported(self):
        a, b = make_asset(), make_asset()
        report = validate_catalog([a, b], frames_for(a))
        codes = [v.code for v in report]
        assert "duplicate_video_id" in codes
        assert any(v.video_id == "v1" for v in report)

    def test_timestamp_mismatch_reported(self):
        # frame 1 at fps=4 should sit at 0.25s, not 0.5s
        asset = make_asset(frame_count=2)
        frames = [
            FrameRecord(video_id="v1", frame_index=0, timestamp_s=0.0),
            FrameRecord(video_id="v1", frame_index=1, timestamp_s=0.5),
        ]
        report = validate_catalog([asset], frames)
        assert [v.code for v in report] == ["timestamp_mismatch"]
        assert report[0].frame_index == 1

    def test_frame_count_mismatch_reported(self):
        asset = make_asset(frame_count=10)
        report = validate_catalog([asset], frames_for(asset)[:4])
        assert any(v.code == "frame_count_mismatch" for v in report)

    def test_unknown_video_reported(self):
        asset = make_asset()
        stray = FrameRecord(video_id="ghost", frame_index=0, timestamp_s=0.0)
        report = validate_catalog([asset], frames_for(asset) + [stray])
        assert any(v.code == "unknown_video" and v.video_id == "ghost" for v in report)

    def test_non_unit_embedding_reported(self):
        asset = make_asset(frame_count=1)
        rec = FrameRecord(
            video_id="v1", frame_index=0, timestamp_s=0.0, embedding=np.array([1.0, 1.0])
        )
        report = validate_catalog([asset], [rec])
        assert any(v.code == "embedding_not_unit" for v in report)


class TestInvariants:
    def test_rotation_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            VideoMetadata(rotation_quarter_turns=4)

    def test_fps_must_be_positive(self):
        with pytest.raises(ValueError):
            make_asset(fps=0.0)

    def test_segment_range_must_not_invert(self):
        with pytest.raises(ValueError):
            SegmentGroup(
                segment_id="s",
                video_id="v",
                start_frame=5,
                end_frame=4,
                representative=np.array([1.0]),
                member_count=1,
            )

    def test_ensure_unit_vector_accepts_tolerance(self):
        v = np.array([1.0, 0.0]) * (1 + 5e-7)
        assert ensure_unit_vector(v) is not None
        with pytest.raises(ValueError):
            ensure_unit_vector(np.array([1.0, 1.0]))


class TestCatalogInterchange:
    def test_round_trip(self, tmp_path):
        assets = [
            make_asset("a", location="HK", species_tags={"shark"}, depth_meters=12.5),
            make_asset("b", rotation_quarter_turns=3),
        ]
        path = tmp_path / "catalog.jsonl"
        dump_catalog(assets, path)
        loaded = load_catalog(path)
        assert [a.video_id for a in loaded] == ["a", "b"]
        assert loaded[0].metadata.location == "HK"
        assert loaded[0].metadata.species_tags == frozenset({"shark"})
        assert loaded[1].metadata.rotation_quarter_turns == 3

    def test_field_names_are_snake_case_on_the_wire(self, tmp_path):
        path = tmp_path / "catalog.jsonl"
        dump_catalog([make_asset("a")], path)
        line = json.loads(path.read_text().splitlines()[0])
        assert set(line) == {"video_id", "source_uri", "fps", "frame_count", "metadata"}
        assert set(line["metadata"]) == {
            "location",
            "capture_time",
            "depth_meters",
            "species_tags",
            "behavior_tags",
            "rotation_quarter_turns",
        }

    def test_bad_line_is_an_error(self, tmp_path):
        path = tmp_path / "catalog.jsonl"
        path.write_text('{"video_id": "x"}\n')
        with pytest.raises(ValueError, match="line 1"):
            load_catalog(path)
