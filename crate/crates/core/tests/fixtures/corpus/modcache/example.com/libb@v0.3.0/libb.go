package libb

import (
	"example.com/libb/sys"
	"example.com/shared"
)

func Run() uintptr {
	return sys.Call(shared.Zero())
}
