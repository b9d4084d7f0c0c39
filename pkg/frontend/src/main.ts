import { DialogueApi } from "./api.js";
import { SessionController } from "./session.js";
import { ChatView } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "http://127.0.0.1:8000";

const api = new DialogueApi(base);
const controller = new SessionController(api);
const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
void new ChatView(root, api, controller).init();
