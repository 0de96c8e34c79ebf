"""Line-delimited JSON classifier used by the subprocess adapter tests.

Text: fraction of tokens equal to "good". Images: mean red channel / 255.
Modes: ok, range (answers 1.5), garbage (answers non-JSON), crash-once PATH
(exits without answering the first time PATH does not exist).
"""
import base64
import json
import os
import sys


def score(kind, item):
    if kind == "text":
        return sum(t == "good" for t in item) / len(item) if item else 0.0
    raw = base64.b64decode(item)
    fields, pos = [], 0
    while len(fields) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    pixels = raw[pos + 1:]
    reds = pixels[0::3]
    return sum(reds) / (255.0 * len(reds))


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    for line in sys.stdin:
        req = json.loads(line)
        if mode == "crash-once" and not os.path.exists(sys.argv[2]):
            open(sys.argv[2], "w").close()
            sys.exit(3)
        if mode == "garbage":
            sys.stdout.write("not json\n")
        else:
            preds = [1.5 if mode == "range" else score(req["kind"], x) for x in req["batch"]]
            sys.stdout.write(json.dumps({"id": req["id"], "predictions": preds}) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
