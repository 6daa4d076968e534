from lib.backends.base import ChatBackend, ChatMessage, ChatRequest, MessageRole, Role
from lib.backends.remote import RemoteBackend, endpoint_from_settings, new_remote
from lib.backends.scripted import ScriptedBackend, ScriptRule, load_script, new_scripted

__all__ = [
    "ChatBackend",
    "ChatMessage",
    "ChatRequest",
    "MessageRole",
    "RemoteBackend",
    "Role",
    "ScriptRule",
    "ScriptedBackend",
    "endpoint_from_settings",
    "load_script",
    "new_remote",
    "new_scripted",
]
