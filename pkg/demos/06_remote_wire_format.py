"""Show the remote wire format against a throwaway local endpoint.

Spins up a minimal chat-completions server in a background thread, points
the remote policy at it, and prints the request JSON the policy sends
(system prompt, conversation turns, base64 image stub) plus the parsed
ranked actions that come back.
"""

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from socnav import RemoteEndpointConfig, RemotePolicy, build_sample, run_policy
from socnav.prompts import PromptConfig, build_system_prompt

received = []


class EchoHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        received.append(json.loads(self.rfile.read(length)))
        body = json.dumps(
            {"choices": [{"message": {"role": "assistant",
                                      "content": "1.Move forward 2.Turn left"}}]}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def main():
    server = ThreadingHTTPServer(("127.0.0.1", 0), EchoHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address
    os.environ.setdefault("SOCNAV_DEMO_KEY", "demo-key")

    policy = RemotePolicy(
        RemoteEndpointConfig(
            base_url=f"http://{host}:{port}",
            model_name="demo-model",
            api_key_env="SOCNAV_DEMO_KEY",
        ),
        mode="single_shot",
    )
    sample = build_sample(seed=7)
    prompt = build_system_prompt(PromptConfig(True, "ai"))
    output = run_policy(policy, sample, prompt)
    server.shutdown()

    request = received[0]
    print("request model:", request["model"])
    for message in request["messages"]:
        content = message["content"]
        preview = content if isinstance(content, str) else "[text + image parts]"
        print(f"  [{message['role']}] {str(preview)[:80]}...")
    print()
    print("raw reply:   ", output.raw_text)
    print("parsed:      ", [a.value for a in output.actions])
    print(f"latency:      {output.latency * 1000:.1f} ms")


if __name__ == "__main__":
    main()
