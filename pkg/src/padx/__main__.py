from padx.cli import entrypoint

entrypoint()
